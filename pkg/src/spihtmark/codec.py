"""Non-blind watermark embedding and extraction in the LH2/HL2 subbands.

Embedding ranks level-2 coefficients with the SPIHT sorting pass, takes the
top ``P*Q/2`` of each band and pushes each one by ``alpha * w * delta`` where
``w`` is the bipolar watermark bit and ``delta`` the NVF distortion budget of
that coefficient. Extraction needs the original image: the sign of the
coefficient difference at each embedding position gives the bit back.

The embedding positions and budgets form an :class:`EmbedPlan`. The plan can
be saved to JSON, or rebuilt from the original image since every step is
deterministic.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import nvf as nvf_mod
from .errors import CapacityError, DimensionError, PlanError
from .spiht import CoeffRef, select_significant
from .wavelet import dwt_forward, dwt_inverse, get_filter_bank, parse_band, quantize_to_image

PLAN_FORMAT_VERSION = 1
EMBED_BANDS = ("LH2", "HL2")
DEFAULT_ALPHA = {"LH2": 3.0, "HL2": 1.0}


@dataclass(frozen=True)
class EmbedConfig:
    alpha: dict = field(default_factory=lambda: dict(DEFAULT_ALPHA))
    nvf: nvf_mod.NvfConfig = nvf_mod.NvfConfig()
    quant: nvf_mod.QuantMatrix = nvf_mod.QuantMatrix()
    filter_bank: str = "haar"
    levels: int = 3

    def __post_init__(self):
        if self.levels != 3:
            raise ValueError("the embedding scheme is defined for a 3-level pyramid")
        if set(self.alpha) != set(EMBED_BANDS):
            raise ValueError(f"alpha must give a value for each of {EMBED_BANDS}")
        get_filter_bank(self.filter_bank)

    def to_dict(self):
        return {
            "alpha": {b: float(self.alpha[b]) for b in EMBED_BANDS},
            "nvf": asdict(self.nvf),
            "quant": [list(row) for row in self.quant.factors],
            "filter_bank": self.filter_bank,
            "levels": self.levels,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            alpha={b: float(v) for b, v in d.get("alpha", DEFAULT_ALPHA).items()},
            nvf=nvf_mod.NvfConfig(**d.get("nvf", {})),
            quant=nvf_mod.QuantMatrix.from_rows(d["quant"]) if "quant" in d else nvf_mod.QuantMatrix(),
            filter_bank=d.get("filter_bank", "haar"),
            levels=int(d.get("levels", 3)),
        )


@dataclass
class EmbedPlan:
    image_dims: tuple
    watermark_shape: tuple
    positions: dict
    delta: dict
    config: EmbedConfig

    def __eq__(self, other):
        if not isinstance(other, EmbedPlan):
            return NotImplemented
        return (
            tuple(self.image_dims) == tuple(other.image_dims)
            and tuple(self.watermark_shape) == tuple(other.watermark_shape)
            and self.positions == other.positions
            and all(np.array_equal(self.delta[b], other.delta[b]) for b in EMBED_BANDS)
            and self.config.to_dict() == other.config.to_dict()
        )

    def to_dict(self):
        cfg = self.config.to_dict()
        return {
            "format_version": PLAN_FORMAT_VERSION,
            "image_dims": list(self.image_dims),
            "watermark_shape": list(self.watermark_shape),
            "filter_bank": cfg["filter_bank"],
            "levels": cfg["levels"],
            "alpha": cfg["alpha"],
            "nvf": cfg["nvf"],
            "quant": cfg["quant"],
            "bands": {
                b: {
                    "positions": [[r.row, r.col] for r in self.positions[b]],
                    "delta": [float(v) for v in self.delta[b]],
                }
                for b in EMBED_BANDS
            },
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("format_version") != PLAN_FORMAT_VERSION:
            raise PlanError(f"unsupported plan format_version {d.get('format_version')!r}")
        try:
            config = EmbedConfig.from_dict(d)
            positions = {
                b: [CoeffRef(b, int(r), int(c)) for r, c in d["bands"][b]["positions"]]
                for b in EMBED_BANDS
            }
            delta = {b: np.asarray(d["bands"][b]["delta"], dtype=np.float64) for b in EMBED_BANDS}
            plan = cls(tuple(d["image_dims"]), tuple(d["watermark_shape"]), positions, delta, config)
        except (KeyError, TypeError, ValueError) as exc:
            raise PlanError(f"malformed plan: {exc}") from exc
        plan.check_consistent()
        return plan

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                d = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise PlanError(f"cannot read plan {path}: {exc}") from exc
        return cls.from_dict(d)

    def check_consistent(self):
        half = int(np.prod(self.watermark_shape)) // 2
        rows, cols = self.image_dims
        for b in EMBED_BANDS:
            _, level = parse_band(b)
            shape = (rows >> level, cols >> level)
            pos = self.positions[b]
            if len(pos) != half or len(self.delta[b]) != half:
                raise PlanError(f"{b}: plan holds {len(pos)} positions, watermark needs {half}")
            if len({(r.row, r.col) for r in pos}) != len(pos):
                raise PlanError(f"{b}: duplicate positions")
            for r in pos:
                if not (0 <= r.row < shape[0] and 0 <= r.col < shape[1]):
                    raise PlanError(f"{b}: position ({r.row}, {r.col}) outside band {shape}")
            if not np.all(self.delta[b] > 0):
                raise PlanError(f"{b}: distortion budget must be positive")


def pretreat(bits):
    """Flatten row-major and map 0 -> -1, 1 -> +1."""
    return np.where(np.asarray(bits).ravel() > 0, 1, -1).astype(np.int8)


def posttreat(bipolar, shape):
    return (np.asarray(bipolar).reshape(shape) > 0).astype(np.uint8)


def split(bipolar):
    bipolar = np.asarray(bipolar)
    if bipolar.size % 2:
        raise ValueError(f"watermark length {bipolar.size} is odd")
    half = bipolar.size // 2
    return bipolar[:half], bipolar[half:]


def _check_host(host, cfg):
    host = np.asarray(host)
    if host.ndim != 2:
        raise DimensionError(f"expected a 2D image, got shape {host.shape}")
    step = 1 << cfg.levels
    if host.shape[0] % step or host.shape[1] % step:
        raise DimensionError(f"image dims {host.shape} must be divisible by {step}")
    return host


def build_plan(pyramid, watermark_shape, cfg):
    """Choose embedding positions and distortion budgets from the host pyramid."""
    size = int(np.prod(watermark_shape))
    if size % 2:
        raise CapacityError(f"watermark size {size} must be even")
    half = size // 2
    capacity = min(pyramid[b].size for b in EMBED_BANDS)
    if half > capacity:
        raise CapacityError(
            f"watermark of {size} bits needs {half} coefficients per band; "
            f"LH2/HL2 hold {capacity}"
        )
    positions = select_significant(pyramid, half)
    delta = {}
    for b in EMBED_BANDS:
        orientation, level = parse_band(b)
        dmap = nvf_mod.distortion_map(pyramid[b], orientation, level, cfg.quant, cfg.nvf)
        idx = tuple(np.array([(r.row, r.col) for r in positions[b]], dtype=np.intp).T)
        delta[b] = dmap[idx]
    return EmbedPlan(tuple(pyramid.source_dims), tuple(watermark_shape), positions, delta, cfg)


def regenerate_plan(original, watermark_shape, cfg=EmbedConfig()):
    """Rebuild the embedding plan from the original host image."""
    original = _check_host(original, cfg)
    return build_plan(dwt_forward(original, cfg.levels, cfg.filter_bank), watermark_shape, cfg)


def embed_real(host, bits, cfg=EmbedConfig()):
    """Embed and return the real-valued watermarked raster with its plan."""
    host = _check_host(host, cfg)
    bits = np.asarray(bits)
    pyramid = dwt_forward(host, cfg.levels, cfg.filter_bank)
    plan = build_plan(pyramid, bits.shape, cfg)
    marked = pyramid.copy()
    for b, part in zip(EMBED_BANDS, split(pretreat(bits))):
        idx = tuple(np.array([(r.row, r.col) for r in plan.positions[b]], dtype=np.intp).T)
        marked[b][idx] += cfg.alpha[b] * part * plan.delta[b]
    return dwt_inverse(marked, cfg.filter_bank), plan


def embed(host, bits, cfg=EmbedConfig()):
    raster, plan = embed_real(host, bits, cfg)
    return quantize_to_image(raster), plan


def extract_raw(original, suspect, plan):
    """Per-position ``(suspect - original) / (alpha * delta)``, both halves concatenated."""
    original = np.asarray(original)
    suspect = np.asarray(suspect)
    if original.shape != suspect.shape:
        raise DimensionError(f"original {original.shape} and suspect {suspect.shape} differ")
    if tuple(original.shape) != tuple(plan.image_dims):
        raise PlanError(f"plan is for {tuple(plan.image_dims)} images, got {original.shape}")
    cfg = plan.config
    if any(cfg.alpha[b] == 0 for b in EMBED_BANDS):
        raise PlanError("cannot extract with a zero scaling factor")
    po = dwt_forward(original, cfg.levels, cfg.filter_bank)
    ps = dwt_forward(suspect, cfg.levels, cfg.filter_bank)
    parts = []
    for b in EMBED_BANDS:
        idx = tuple(np.array([(r.row, r.col) for r in plan.positions[b]], dtype=np.intp).T)
        parts.append((ps[b][idx] - po[b][idx]) / (cfg.alpha[b] * plan.delta[b]))
    return np.concatenate(parts)


def extract(original, suspect, plan):
    """Recover the watermark bits; a zero difference decides +1 (bit 1)."""
    raw = extract_raw(original, suspect, plan)
    return posttreat(np.where(raw >= 0, 1, -1), plan.watermark_shape)
