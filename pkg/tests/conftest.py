import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))


def rand_gray(rng, h, w):
    """Random 8-bit-lattice grayscale image in [0, 1]."""
    return rng.integers(0, 256, size=(h, w)).astype(np.float64) / 255.0
