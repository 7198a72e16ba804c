import numpy as np
import pytest

from vcmkit.imagecore import ColorFormat, Frame, VideoSequence, rgb_to_yuv420
from vcmkit.synth import make_corpus


@pytest.fixture(scope="session")
def corpus():
    return make_corpus()


@pytest.fixture(scope="session")
def yuv_corpus(corpus):
    return [
        (item.name, to_yuv420(item.sequence))
        for item in corpus
    ]


def to_yuv420(seq: VideoSequence) -> VideoSequence:
    return VideoSequence([rgb_to_yuv420(f) for f in seq.frames], fps=seq.fps)


def random_yuv_sequence(seed: int, width: int, height: int, n_frames: int, fps: float = 30.0) -> VideoSequence:
    rng = np.random.default_rng(seed)
    frames = []
    for _ in range(n_frames):
        y = rng.integers(0, 256, (height, width), dtype=np.uint8)
        u = rng.integers(0, 256, (height // 2, width // 2), dtype=np.uint8)
        v = rng.integers(0, 256, (height // 2, width // 2), dtype=np.uint8)
        frames.append(Frame((y, u, v), ColorFormat.YUV420))
    return VideoSequence(frames, fps=fps)
