from src.modules.cli import run
import multiprocessing as mp
import sys


if __name__ == "__main__":
    # Workers are spawned, never forked
    mp.set_start_method("spawn")
    sys.exit(run())
