"""Data quantization and state compression."""
from dqsca.compression import PathEntry, StatePath, compress_path  # noqa: F401
from dqsca.merge import NoPriorSample, NoStreams, merge_streams  # noqa: F401
from dqsca.pipeline import ReductionStats, refresh_quantization, run_dqsca  # noqa: F401
from dqsca.quantization import (  # noqa: F401
    QuantizationSpec,
    SpecViolation,
    load_spec,
    quantize_row,
    quantize_value,
)
from dqsca.state_db import StateDatabase, SystemState, map_to_state  # noqa: F401
