import os
from signal import signal, SIGINT, SIGTERM
import sys
import warnings


class TerminationGuard:

    def __enter__(self):
        self.terminate = False
        self.sigint = signal(SIGINT, self)
        self.sigterm = signal(SIGTERM, self)
        return self

    def __call__(self, *_):
        self.terminate = True
        warnings.warn("The process termination is delayed until the output files are written")

    def __exit__(self, *_):
        signal(SIGINT, self.sigint)
        signal(SIGTERM, self.sigterm)
        if self.terminate:
            sys.exit(1)


def atomic_write(path, writer):
    """
    Writes a file through a temporary sibling and renames it into place.

    `writer` receives an open text file. SIGINT/SIGTERM are delayed until the
    rename is done, so a reader never sees a half written manifest.
    """
    tmp = f"{path}.tmp"
    with TerminationGuard():
        with open(tmp, "w", newline="") as f:
            writer(f)
        os.replace(tmp, path)
