import numpy as np
import pytest

from spihtmark import codec, corpus

NATURAL = ("skimage:camera", "skimage:moon", "skimage:brick", "skimage:grass", "skimage:gravel")
SYNTHETIC = (
    "synthetic:ramp",
    "synthetic:noise",
    "synthetic:fractal:0",
    "synthetic:fractal:1",
    "synthetic:checkerboard",
)
STANDARD_CORPUS = NATURAL + SYNTHETIC

# photographs used for the robustness curves
ROBUSTNESS_IMAGES = ("skimage:camera", "skimage:moon", "skimage:brick")

_image_cache = {}
_embed_cache = {}


def load(source):
    if source not in _image_cache:
        _image_cache[source] = corpus.resolve_image(source)
    return _image_cache[source]


def embedded(source, watermark="cuet"):
    """Cached ``(host, bits, marked, plan)`` with the default config."""
    key = (source, watermark)
    if key not in _embed_cache:
        host = load(source)
        bits = corpus.text_watermark() if watermark == "cuet" else corpus.random_watermark(seed=int(watermark))
        marked, plan = codec.embed(host, bits)
        _embed_cache[key] = (host, bits, marked, plan)
    return _embed_cache[key]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def camera():
    return load("skimage:camera")


# acceptance criteria report lines, printed in the terminal summary
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)
