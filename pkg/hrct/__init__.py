# hrct/: hierarchical risk correlation trees: model, CP propagation, risk
