import os

from dotenv import load_dotenv

load_dotenv()

OUTPUT_DIR = os.getenv("WAVECANCOH_OUTPUT_DIR", os.path.join(os.getcwd(), "output"))
LOG_LEVEL = os.getenv("WAVECANCOH_LOG_LEVEL", "INFO")
WORKERS = int(os.getenv("WAVECANCOH_WORKERS", "1"))

# Wavelets
SUPPORTED_FAMILIES = {
    "haar": "haar",
    "db2": "db2",
}
DEFAULT_FAMILY = "haar"
MAX_SCALES = 14
MAX_WAVELET_SUPPORT = 2**16

# Spectral estimation
HALF_WIDTH_EXPONENT = 0.7
DEFAULT_RELATIVE_EPSILON = 1e-8
NOISE_FLOOR = 1.0
NOISE_RANGE_TOLERANCE = 1e-10
FLOOR_WARN_FRACTION = 0.5
COARSEST_SCALE_DIVISOR = 8

# Simulation
AR_BURN_IN = 500
AR2_ETA = (0.02, 0.06, 0.10, 0.175, 0.375)
AR2_SHARPNESS = (0.03, 0.03, 0.03, 0.05, 0.05)
AR2_ALPHA = 0.7
AR2_BETA = 0.6
AR2_FS = 100.0
CHANGE_POINT = 0.5

# LSP baseline
STFT_WINDOW = 128
STFT_HOP = 8
STFT_SIGMA_DIVISOR = 6.0
LSP_BAND = (25.0, 50.0)

# Inference
WALD_LEVEL = 0.95
PERM_WINDOW = 0.2
PERM_N = 1000

# Experiments
FIG2_LEFT_REPS = 200
FIG2_RIGHT_REPS = 50
CAUSAL_LAGS = (0, 10, 20, 30, 40, 50)
CAUSAL_SURROGATE_DELAY = 20
EXPERIMENTS = ("fig2-left", "fig2-right", "causal-sweep")

# I/O
FLOAT_FORMAT = "%.17g"
MANIFEST_NAME = "manifest.json"

# Exit codes
EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_NUMERICAL = 4
EXIT_IO = 5
