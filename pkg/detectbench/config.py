"""
Configuration settings for detectbench.
"""

import os
from pathlib import Path
from dotenv import load_dotenv  # pyright: ignore[reportMissingImports]

# Base paths
INSTALL_DIR = Path(__file__).parent.parent  # detectbench installation directory
BENCHMARKS_DIR = INSTALL_DIR / "benchmarks"
GOLDEN_DIR = BENCHMARKS_DIR / "golden"

# Load environment variables from the working directory
WORKSPACE_ROOT = Path(os.getcwd())
ENV_FILE = WORKSPACE_ROOT / ".env"
load_dotenv(dotenv_path=ENV_FILE)

# Machine defaults
REGISTER_COUNT = 32
WORD_BITS = 64
WORD_MASK = (1 << WORD_BITS) - 1
MEMORY_WORDS = 4096
MAX_CYCLES = 1_000_000
HANG_MULTIPLIER = 3.0  # "three times the normal execution time"

# Fault injection defaults
DEFAULT_FAULTS = 1000
DEFAULT_SEED = 42
DEFAULT_KIND_MIX = 0.5  # fraction of transient faults
INJECT_MEAN_FRACTION = 0.5  # mean = golden_cycles / 2
INJECT_STDDEV_FRACTION = 1.0 / 6.0  # stddev = golden_cycles / 6
CONFIDENCE_LEVEL = 0.95

# R-SMT defaults
RSMT_BUFFER_CAPACITY = 10
RSMT_COMMIT_WIDTH = 1
RSMT_POLICY = "round_robin"

# ParDet defaults
PARDET_CHECKERS = 3
PARDET_SEGMENT_INSNS = 1000
PARDET_SPEED_RATIO = 0.25
PARDET_CHECKPOINT_COST = 32
PARDET_LOG_ENTRIES = 1024

# Area model (fractions of the unprotected core)
AREA_DMR = 1.00
AREA_SMT_LOGIC = 0.06
AREA_RSMT_BUFFER_PER_10 = 0.0004
AREA_PARDET_PER_3_CHECKERS = 0.24

# Power model (arbitrary energy units)
POWER_MAIN_STATIC = 1.0
POWER_MAIN_PER_COMMIT = 2.0
POWER_SMALL_CORE_FACTOR = 0.3
POWER_UNCORE_STATIC = 1.0
POWER_SMT_STATIC_OVERHEAD = AREA_SMT_LOGIC

# Histograms
HISTOGRAM_BINS = 10

# Campaign execution (environment overrides)
SEED = int(os.getenv("DETECTBENCH_SEED", DEFAULT_SEED))
WORKERS = int(os.getenv("DETECTBENCH_WORKERS", "1"))

# Exit codes
EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_GOLDEN_FAILURE = 2
EXIT_INVARIANT_VIOLATION = 3

# Logging
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
