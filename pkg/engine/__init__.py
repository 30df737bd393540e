# engine/: run context and telemetry for CLI runs
