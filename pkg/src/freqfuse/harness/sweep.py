"""Cutoff-frequency sweep: caption filtered images, score hallucinations.

For each cutoff the batch of images is decomposed, one frequency branch is
exported (clamped to 8-bit), captioned by the oracle process, and scored
against ground truth. One CSV row per cutoff; results are all-or-nothing,
a failure anywhere emits no partial rows.
"""

import dataclasses
import json
import tempfile
from dataclasses import dataclass
from pathlib import Path

from ..metrics import CaptionRecord, SynonymTable, chair, extract_objects
from ..spectral import decompose
from .formats import DataFormatError, bundled_synonyms_path, load_ground_truth
from .imageio import load_image, save_image
from .oracle import DEFAULT_PROMPT, DEFAULT_TIMEOUT, CaptionOracle

MODE_LOW = "low"
MODE_HIGH = "high"


@dataclass(frozen=True)
class SweepConfig:
    mode: str
    cutoffs: tuple
    images: tuple
    oracle: str
    ground_truth: str
    synonyms: str = None
    seed: int = 0
    timeout: float = DEFAULT_TIMEOUT
    prompt: str = DEFAULT_PROMPT

    def __post_init__(self):
        if self.mode not in (MODE_LOW, MODE_HIGH):
            raise ValueError(f"mode must be '{MODE_LOW}' or '{MODE_HIGH}', got {self.mode!r}")
        cutoffs = tuple(float(c) for c in self.cutoffs)
        if not cutoffs:
            raise ValueError("cutoffs must be non-empty")
        if any(c <= 0 for c in cutoffs):
            raise ValueError(f"cutoffs must be positive, got {list(cutoffs)}")
        if any(b <= a for a, b in zip(cutoffs, cutoffs[1:])):
            raise ValueError(f"cutoffs must be strictly increasing, got {list(cutoffs)}")
        images = tuple(str(p) for p in self.images)
        if not images:
            raise ValueError("image list must be non-empty")
        object.__setattr__(self, "cutoffs", cutoffs)
        object.__setattr__(self, "images", images)

    @classmethod
    def from_json(cls, path):
        """Load a config file; relative paths resolve against its directory."""
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}: invalid JSON ({exc.msg})") from None
        if not isinstance(raw, dict):
            raise DataFormatError(f"{path}: config must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise DataFormatError(f"{path}: unknown config keys {sorted(unknown)}")
        missing = {"mode", "cutoffs", "images", "oracle", "ground_truth"} - set(raw)
        if missing:
            raise DataFormatError(f"{path}: missing config keys {sorted(missing)}")
        base = path.parent
        raw["images"] = [str(base / p) for p in raw["images"]]
        raw["ground_truth"] = str(base / raw["ground_truth"])
        if raw.get("synonyms") is not None:
            raw["synonyms"] = str(base / raw["synonyms"])
        try:
            return cls(**raw)
        except ValueError as exc:
            raise DataFormatError(f"{path}: {exc}") from None


@dataclass(frozen=True)
class SweepRow:
    cutoff: float
    chair_i: float
    chair_s: float
    n: int


@dataclass(frozen=True)
class SweepResult:
    mode: str
    rows: tuple

    def to_csv(self) -> str:
        lines = ["cutoff,chair_i,chair_s,n"]
        for row in self.rows:
            lines.append(
                f"{row.cutoff:g},{row.chair_i:.6f},{row.chair_s:.6f},{row.n}"
            )
        return "\n".join(lines) + "\n"


def _image_ids(paths):
    ids = [Path(p).stem for p in paths]
    seen = set()
    for image_id in ids:
        if image_id in seen:
            raise DataFormatError(
                f"duplicate image id {image_id!r}; image basenames must be unique"
            )
        seen.add(image_id)
    return ids


def run_sweep(config: SweepConfig) -> SweepResult:
    table = SynonymTable.from_json(config.synonyms or bundled_synonyms_path())
    gt_raw = load_ground_truth(config.ground_truth)
    ids = _image_ids(config.images)

    ground_truth = {}
    for image_id in ids:
        if image_id not in gt_raw:
            raise DataFormatError(
                f"{config.ground_truth}: no ground truth for image {image_id!r}"
            )
        canonical = set()
        for name in gt_raw[image_id]:
            target = table.canonicalize(name)
            if target is None:
                raise DataFormatError(
                    f"{config.ground_truth}: unknown object class {name!r} "
                    f"for image {image_id!r}"
                )
            canonical.add(target)
        ground_truth[image_id] = canonical

    originals = [load_image(p) for p in config.images]
    branch = 0 if config.mode == MODE_LOW else 1

    rows = []
    with tempfile.TemporaryDirectory(prefix="freqfuse-sweep-") as tmp:
        for cutoff in config.cutoffs:
            batch = []
            for image_id, image in zip(ids, originals):
                filtered = decompose(image, cutoff)[branch]
                out_path = Path(tmp) / f"{image_id}-{cutoff:g}.ppm"
                save_image(filtered, out_path)
                batch.append((image_id, out_path))
            with CaptionOracle(
                config.oracle, timeout=config.timeout, prompt=config.prompt
            ) as oracle:
                captions = oracle.caption_batch(batch)
            records = [
                CaptionRecord(
                    id=image_id,
                    mentioned=extract_objects(captions[image_id], table),
                    ground_truth=ground_truth[image_id],
                )
                for image_id in ids
            ]
            report = chair(records)
            rows.append(
                SweepRow(
                    cutoff=cutoff,
                    chair_i=report.chair_i,
                    chair_s=report.chair_s,
                    n=len(records),
                )
            )
    return SweepResult(mode=config.mode, rows=tuple(rows))
