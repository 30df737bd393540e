# alertflow/: severity normalization, correlation and per-node alert queues
