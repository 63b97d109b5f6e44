from contextlib import contextmanager
import time


class Elapsed:
    duration = 0.0


@contextmanager
def Timer(logger, message):
    logger(f"Started: {message}")
    start = time.monotonic()
    elapsed = Elapsed()
    yield elapsed
    elapsed.duration = time.monotonic() - start
    logger(f"Finished: {message} (duration: {elapsed.duration:.3f} s)")
