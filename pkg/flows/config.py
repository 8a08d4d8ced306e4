import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from prefect.task_runners import ThreadPoolTaskRunner

load_dotenv()

# Parallélisme (tâches Prefect et lots Monte Carlo)
PCSFT_THREADS = max(1, int(os.getenv("PCSFT_THREADS", "1")))

# Répertoires
PCSFT_OUTPUT_DIR = os.getenv("PCSFT_OUTPUT_DIR", "./data/runs")
PCSFT_PRESETS_DIR = os.getenv("PCSFT_PRESETS_DIR", str(Path(__file__).resolve().parent.parent / "data" / "presets"))

# Valeurs par défaut des expériences
PCSFT_DEFAULT_SEED = int(os.getenv("PCSFT_DEFAULT_SEED", "42"))
PCSFT_DEFAULT_COUNT = int(os.getenv("PCSFT_DEFAULT_COUNT", "100000"))


def get_output_dir(override: Optional[str] = None) -> Path:
    path = Path(override or PCSFT_OUTPUT_DIR)
    path.mkdir(parents=True, exist_ok=True)
    return path


def get_task_runner() -> ThreadPoolTaskRunner:
    return ThreadPoolTaskRunner(max_workers=PCSFT_THREADS)


if __name__ == "__main__":
    print(f"threads={PCSFT_THREADS} output={PCSFT_OUTPUT_DIR} presets={PCSFT_PRESETS_DIR}")
