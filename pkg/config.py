import os
from pathlib import Path
from dotenv import load_dotenv

load_dotenv()

# Logging
DEBUG_ADAPTER = os.getenv("DEBUG_ADAPTER", "0") == "1"
ADAPTER_LOG_FILE = os.getenv("ADAPTER_LOG_FILE")

# Scenario defaults
DEFAULT_TICKS = int(os.getenv("DEFAULT_TICKS", "20"))

# Simulated phone clock and calendar (minutes of day)
CLOCK_START = int(os.getenv("CLOCK_START", "480"))
MEETING_START = int(os.getenv("MEETING_START", "600"))
MEETING_END = int(os.getenv("MEETING_END", "660"))

# Randomized scenarios
FUZZ_SEED = int(os.getenv("FUZZ_SEED", "7"))
FUZZ_TICKS = int(os.getenv("FUZZ_TICKS", "40"))

# General-state effector settings
INITIAL_VOLUME = 50
INITIAL_VIBRATION = "OFF"

# Checked-in data
BASE_DIR = Path(__file__).resolve().parent
TABLES_DIR = BASE_DIR / "data"
SCENARIOS_DIR = BASE_DIR / "scenarios"
