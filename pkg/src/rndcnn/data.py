"""Dataset ingestion, preprocessing, splitting, and batch streams.

Two on-disk layouts are accepted: a directory with one subdirectory per
class holding .pgm/.ppm files, or a manifest CSV with header
``path,label`` (paths relative to the manifest).  Class names are sorted
lexicographically to fix the label indices; sample order within the
index is lexicographic too, so ingestion is deterministic.

Preprocessing decodes, replicates grayscale to 3 channels, resizes with
half-pixel bilinear sampling to a square target (default 150), and
scales into [0, 1].  Augmentation happens only in training batch
streams; validation/test streams serve the preprocessed pixels verbatim,
in index order.
"""

import csv
import os
from dataclasses import dataclass, replace

import numpy as np

from rndcnn.augment import AugmentConfig, augment
from rndcnn.container import read_container, write_container
from rndcnn.errors import ConfigError, DecodeError, IngestError
from rndcnn.netpbm import read_pnm
from rndcnn.image_ops import bilinear_resize
from rndcnn.rng import Rng

CACHE_MAGIC = b"RNDD"
IMAGE_EXTENSIONS = (".pgm", ".ppm")
DEFAULT_SIZE = 150
TRAIN, VAL, TEST = "train", "val", "test"


@dataclass(frozen=True)
class DatasetIndex:
    classes: tuple[str, ...]
    samples: tuple[tuple[str, int], ...]  # (path, class index)
    split: tuple[str, ...] | None = None  # per-sample tag, aligned with samples

    def counts(self, split: str | None = None) -> np.ndarray:
        out = np.zeros(len(self.classes), dtype=np.int64)
        for i, (_, label) in enumerate(self.samples):
            if split is None or (self.split and self.split[i] == split):
                out[label] += 1
        return out

    def __len__(self) -> int:
        return len(self.samples)


def load_dataset(root, classes: list[str] | None = None) -> DatasetIndex:
    """Build an index from a class-per-directory tree or a manifest CSV."""
    root = os.fspath(root)
    if os.path.isfile(root):
        return _load_manifest(root, classes)
    manifest = os.path.join(root, "manifest.csv")
    if os.path.isfile(manifest):
        return _load_manifest(manifest, classes)
    if not os.path.isdir(root):
        raise IngestError(f"dataset root {root!r} does not exist")
    found = sorted(
        d for d in os.listdir(root) if os.path.isdir(os.path.join(root, d)) and not d.startswith(".")
    )
    if classes is None:
        class_names = found
    else:
        class_names = sorted(classes)
        missing = [c for c in class_names if c not in found]
        if missing:
            raise IngestError("class directories missing", [(c, "no such directory") for c in missing])
    if not class_names:
        raise IngestError(f"no class directories under {root!r}")
    samples = []
    for label, name in enumerate(class_names):
        class_dir = os.path.join(root, name)
        files = sorted(
            f for f in os.listdir(class_dir) if f.lower().endswith(IMAGE_EXTENSIONS)
        )
        samples += [(os.path.join(class_dir, f), label) for f in files]
    if not samples:
        raise IngestError(f"no {'/'.join(IMAGE_EXTENSIONS)} files under {root!r}")
    return DatasetIndex(tuple(class_names), tuple(samples))


def _load_manifest(path, classes: list[str] | None) -> DatasetIndex:
    base = os.path.dirname(os.path.abspath(path))
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["path", "label"]:
            raise IngestError(f"manifest {path!r} must start with header 'path,label', got {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise IngestError("malformed manifest", [(f"{path}:{lineno}", f"expected 2 columns, got {len(row)}")])
            rows.append((lineno, row[0], row[1]))
    if classes is None:
        class_names = sorted({label for _, _, label in rows})
    else:
        class_names = sorted(classes)
    label_index = {name: i for i, name in enumerate(class_names)}
    bad = [(f"{path}:{lineno}", f"unknown label {label!r}") for lineno, _, label in rows if label not in label_index]
    if bad:
        raise IngestError("manifest rows with unknown labels", bad)
    samples = sorted(
        (os.path.join(base, rel), label_index[label]) for _, rel, label in rows
    )
    if not samples:
        raise IngestError(f"manifest {path!r} lists no samples")
    return DatasetIndex(tuple(class_names), tuple(samples))


def stratified_split(index: DatasetIndex, train_fraction: float = 0.8, seed: int = 0) -> DatasetIndex:
    """Tag every sample train/val: per class, a seeded shuffle sends the
    first ceil(fraction * n) to train and the rest to val."""
    if not 0.0 < train_fraction < 1.0:
        raise ConfigError(f"train fraction must be in (0,1), got {train_fraction}")
    rng = Rng(seed)
    tags = [""] * len(index.samples)
    for label, name in enumerate(index.classes):
        members = [i for i, (_, lab) in enumerate(index.samples) if lab == label]
        if len(members) < 2:
            raise ConfigError(f"class {name!r} has {len(members)} sample(s); need at least 2 to split")
        order = rng.child(label).permutation(len(members))
        n_train = int(np.ceil(train_fraction * len(members)))
        for pos, j in enumerate(order):
            tags[members[j]] = TRAIN if pos < n_train else VAL
    return replace(index, split=tuple(tags))


def preprocess(pixels: np.ndarray, size: int = DEFAULT_SIZE) -> np.ndarray:
    """uint8 (H,W) or (H,W,3) -> float32 (size,size,3) in [0,1]."""
    img = pixels.astype(np.float32)
    if img.ndim == 2:
        img = np.repeat(img[:, :, None], 3, axis=2)
    img = bilinear_resize(img, size, size)
    return img / np.float32(255.0)


def decode_and_preprocess(path, size: int = DEFAULT_SIZE) -> np.ndarray:
    return preprocess(read_pnm(path), size)


@dataclass
class ArrayDataset:
    """Preprocessed samples held in memory."""

    images: np.ndarray  # (N, size, size, 3) float32 in [0,1]
    labels: np.ndarray  # (N,) int32
    indices: np.ndarray  # (N,) int32 positions in the source DatasetIndex
    classes: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.labels)

    def counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=len(self.classes)).astype(np.int64)


def materialize(index: DatasetIndex, split: str | None = None, size: int = DEFAULT_SIZE) -> ArrayDataset:
    """Decode and preprocess one split (or everything). Collects every
    failing file into a single itemized error instead of stopping at the
    first."""
    chosen = [
        (i, path, label)
        for i, (path, label) in enumerate(index.samples)
        if split is None or (index.split and index.split[i] == split)
    ]
    if not chosen:
        raise ConfigError(f"split {split!r} selects no samples")
    images, labels, positions, failures = [], [], [], []
    for i, path, label in chosen:
        try:
            images.append(decode_and_preprocess(path, size))
        except (OSError, DecodeError) as exc:
            failures.append((path, str(exc)))
            continue
        labels.append(label)
        positions.append(i)
    if failures:
        raise IngestError(f"{len(failures)} file(s) failed to ingest", failures)
    return ArrayDataset(
        np.stack(images),
        np.asarray(labels, dtype=np.int32),
        np.asarray(positions, dtype=np.int32),
        index.classes,
    )


def one_hot(labels: np.ndarray, k: int) -> np.ndarray:
    out = np.zeros((len(labels), k), dtype=np.float32)
    out[np.arange(len(labels)), labels] = 1.0
    return out


def batch_iter(
    ds: ArrayDataset,
    batch_size: int,
    shuffle_rng: Rng | None = None,
    augment_cfg: AugmentConfig | None = None,
    augment_rng: Rng | None = None,
):
    """Yield (images, one-hot targets) batches.

    Training streams pass a shuffle rng and (optionally) an augmentation
    config plus parent rng; each sample's transform then draws from a
    child stream keyed by its index position, so the pixels produced do
    not depend on the shuffle order.  Without those, batches come in
    index order with verbatim pixels -- the validation/test contract.
    """
    if batch_size < 1:
        raise ConfigError(f"batch size must be >= 1, got {batch_size}")
    n = len(ds)
    k = len(ds.classes)
    order = shuffle_rng.permutation(n) if shuffle_rng is not None else np.arange(n)
    for start in range(0, n, batch_size):
        chunk = order[start : start + batch_size]
        images = ds.images[chunk]
        if augment_cfg is not None and augment_cfg.enabled:
            if augment_rng is None:
                raise ConfigError("augmentation requires an rng")
            images = np.stack(
                [
                    augment(img, augment_cfg, augment_rng.child(int(ds.indices[j])))
                    for img, j in zip(images, chunk)
                ]
            )
        yield images, one_hot(ds.labels[chunk], k)


def save_cache(ds: ArrayDataset, path) -> None:
    header = {"kind": "dataset-cache", "classes": list(ds.classes)}
    write_container(
        path,
        CACHE_MAGIC,
        header,
        [("images", ds.images), ("labels", ds.labels), ("indices", ds.indices)],
    )


def load_cache(path) -> ArrayDataset:
    header, tensors = read_container(path, CACHE_MAGIC)
    return ArrayDataset(
        tensors["images"],
        tensors["labels"],
        tensors["indices"],
        tuple(header["classes"]),
    )
