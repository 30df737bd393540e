# ingest/: line-oriented parsers for raw datasets, ARFF subsets and alert logs
