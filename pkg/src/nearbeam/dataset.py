"""Labeled dataset generation, binary persistence, and splits.

Every sample is regenerable from its own 64-bit seed: the per-sample RNG
draws the paths, the training SNR, and the measurement noise in a fixed
order, and the noiseless exhaustive sweep provides the (n*, s*) labels.
The file format is a fixed header, a JSON blob with the generating config
(so labels can be audited later), and fixed-size binary records.
"""

from __future__ import annotations

import csv
import json
import struct
from dataclasses import dataclass

import numpy as np

from .codebook import PolarCodebook, WideCodebook, build_polar_codebook, build_wide_codebook
from .geometry import ArrayConfig, ScenarioConfig, sample_paths, synth_channel
from .measurement import link_from_snr_db, measure_wide, sweep_oracle

_MAGIC = b"NBDS"
_FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIIIIIdQQQQQI")


class DatasetFormatError(Exception):
    """Raised when a dataset file is corrupt or inconsistent."""


@dataclass
class Dataset:
    """In-memory labeled dataset plus the metadata needed to audit it."""

    num_angles: int            # N
    num_rings: int             # S
    num_wide: int              # M
    subarray_factor: int       # T
    carrier_wavelength: float
    base_seed: int
    n_train: int
    n_val: int
    n_test: int
    yw: np.ndarray             # (num_samples, M) complex128
    label_n: np.ndarray        # (num_samples,) uint32, 1-based angle index
    label_s: np.ndarray        # (num_samples,) uint32, 1-based ring index
    snr_db: np.ndarray         # (num_samples,) float64
    seeds: np.ndarray          # (num_samples,) uint64
    config: dict               # generation config, JSON-serializable

    @property
    def num_samples(self) -> int:
        return len(self.yw)

    @property
    def train_indices(self) -> np.ndarray:
        return np.arange(0, self.n_train)

    @property
    def val_indices(self) -> np.ndarray:
        return np.arange(self.n_train, self.n_train + self.n_val)

    @property
    def test_indices(self) -> np.ndarray:
        return np.arange(self.n_train + self.n_val, self.num_samples)

    def label_index(self, i: int) -> int:
        """Flat 1-based codebook index of sample i's label."""
        return (int(self.label_s[i]) - 1) * self.num_angles + int(self.label_n[i])


def split_sizes(num_samples: int, val_fraction: float = 0.1, test_fraction: float = 0.1):
    """80/10/10-style split: floor for val and test, remainder to train."""
    n_val = int(np.floor(num_samples * val_fraction))
    n_test = int(np.floor(num_samples * test_fraction))
    n_train = num_samples - n_val - n_test
    if n_train <= 0:
        raise ValueError("split leaves no training samples")
    return n_train, n_val, n_test


def generate_sample(
    seed: int,
    scenario: ScenarioConfig,
    polar: PolarCodebook,
    wide: WideCodebook,
    snr_range_db: tuple[float, float],
):
    """Regenerate one sample from its seed. Draw order is part of the format:
    paths, then SNR, then measurement noise."""
    rng = np.random.default_rng(int(seed))
    paths = sample_paths(rng, scenario)
    h = synth_channel(polar.array, paths)
    snr_db = rng.uniform(*snr_range_db)
    meas = measure_wide(wide, h, link_from_snr_db(snr_db), rng)
    _, s_star, n_star = sweep_oracle(polar, h)
    return meas.values, n_star, s_star, snr_db


def generate_dataset(
    array_cfg: ArrayConfig,
    scenario: ScenarioConfig,
    num_rings: int,
    r_min: float,
    r_max: float,
    subarray_factor: int,
    num_samples: int,
    base_seed: int,
    snr_range_db: tuple[float, float] = (0.0, 20.0),
    val_fraction: float = 0.1,
    test_fraction: float = 0.1,
) -> Dataset:
    """Generate a labeled dataset of wide-beam measurements.

    Per-sample seeds are drawn once from a master generator, so samples are
    independent of generation order and each one can be rebuilt in isolation.
    """
    lo, hi = snr_range_db
    if hi < lo:
        raise ValueError(f"invalid snr_range_db {snr_range_db}")
    polar = build_polar_codebook(array_cfg, num_rings, r_min, r_max)
    wide = build_wide_codebook(array_cfg, subarray_factor)
    n_train, n_val, n_test = split_sizes(num_samples, val_fraction, test_fraction)

    master = np.random.default_rng(base_seed)
    seeds = master.integers(0, 2 ** 63, size=num_samples, dtype=np.uint64)

    yw = np.empty((num_samples, wide.num_wide), dtype=np.complex128)
    label_n = np.empty(num_samples, dtype=np.uint32)
    label_s = np.empty(num_samples, dtype=np.uint32)
    snr = np.empty(num_samples, dtype=np.float64)
    for i in range(num_samples):
        values, n_star, s_star, snr_db = generate_sample(
            seeds[i], scenario, polar, wide, snr_range_db
        )
        yw[i] = values
        label_n[i] = n_star
        label_s[i] = s_star
        snr[i] = snr_db

    config = {
        "array": {
            "num_antennas": array_cfg.num_antennas,
            "carrier_wavelength": array_cfg.carrier_wavelength,
            "antenna_spacing": array_cfg.antenna_spacing,
        },
        "scenario": {
            "num_paths": scenario.num_paths,
            "gain_variances": list(scenario.gain_variances),
            "distance_range": list(scenario.distance_range),
            "angle_range": list(scenario.angle_range),
        },
        "codebook": {
            "num_rings": num_rings,
            "r_min": r_min,
            "r_max": r_max,
            "subarray_factor": subarray_factor,
        },
        "snr_range_db": [lo, hi],
    }
    return Dataset(
        num_angles=array_cfg.num_antennas,
        num_rings=num_rings,
        num_wide=wide.num_wide,
        subarray_factor=subarray_factor,
        carrier_wavelength=array_cfg.carrier_wavelength,
        base_seed=int(base_seed),
        n_train=n_train,
        n_val=n_val,
        n_test=n_test,
        yw=yw,
        label_n=label_n,
        label_s=label_s,
        snr_db=snr,
        seeds=seeds,
        config=config,
    )


def _record_dtype(num_wide: int) -> np.dtype:
    return np.dtype([
        ("yw", "<c16", (num_wide,)),
        ("label_n", "<u4"),
        ("label_s", "<u4"),
        ("snr_db", "<f8"),
        ("seed", "<u8"),
    ])


def save_dataset(path, ds: Dataset) -> None:
    blob = json.dumps(ds.config, sort_keys=True, separators=(",", ":")).encode()
    header = _HEADER.pack(
        _MAGIC, _FORMAT_VERSION,
        ds.num_angles, ds.num_rings, ds.num_wide, ds.subarray_factor,
        ds.carrier_wavelength,
        ds.num_samples, ds.n_train, ds.n_val, ds.n_test,
        ds.base_seed, len(blob),
    )
    records = np.zeros(ds.num_samples, dtype=_record_dtype(ds.num_wide))
    records["yw"] = ds.yw
    records["label_n"] = ds.label_n
    records["label_s"] = ds.label_s
    records["snr_db"] = ds.snr_db
    records["seed"] = ds.seeds
    with open(path, "wb") as f:
        f.write(header)
        f.write(blob)
        f.write(records.tobytes())


def load_dataset(path, verify_fraction: float = 0.01) -> Dataset:
    """Read a dataset file; spot-checks a fraction of labels against the
    exhaustive sweep recomputed from the stored per-sample seeds."""
    with open(path, "rb") as f:
        raw = f.read(_HEADER.size)
        if len(raw) < _HEADER.size:
            raise DatasetFormatError("truncated dataset header")
        (magic, version, n_angles, n_rings, n_wide, t_factor, lam,
         count, n_train, n_val, n_test, base_seed, blob_len) = _HEADER.unpack(raw)
        if magic != _MAGIC:
            raise DatasetFormatError(f"bad magic {magic!r}")
        if version != _FORMAT_VERSION:
            raise DatasetFormatError(f"unsupported dataset format version {version}")
        if n_train + n_val + n_test != count:
            raise DatasetFormatError("split sizes do not sum to sample count")
        try:
            config = json.loads(f.read(blob_len))
        except json.JSONDecodeError as exc:
            raise DatasetFormatError("unreadable config blob") from exc
        dtype = _record_dtype(n_wide)
        raw = f.read(count * dtype.itemsize)
        if len(raw) != count * dtype.itemsize:
            raise DatasetFormatError("truncated record block")
        records = np.frombuffer(raw, dtype=dtype)
    ds = Dataset(
        num_angles=n_angles, num_rings=n_rings, num_wide=n_wide,
        subarray_factor=t_factor, carrier_wavelength=lam,
        base_seed=base_seed, n_train=n_train, n_val=n_val, n_test=n_test,
        yw=records["yw"].copy(),
        label_n=records["label_n"].copy(),
        label_s=records["label_s"].copy(),
        snr_db=records["snr_db"].copy(),
        seeds=records["seed"].copy(),
        config=config,
    )
    if verify_fraction > 0:
        spot_check_labels(ds, fraction=verify_fraction)
    return ds


def spot_check_labels(ds: Dataset, fraction: float = 0.01) -> int:
    """Regenerate an evenly spaced subset of samples from their seeds and
    compare the stored labels; returns the number checked."""
    count = max(1, int(round(ds.num_samples * fraction)))
    idx = np.unique(np.linspace(0, ds.num_samples - 1, count).astype(int))
    arr = ds.config["array"]
    cb = ds.config["codebook"]
    array_cfg = ArrayConfig(
        num_antennas=arr["num_antennas"],
        carrier_wavelength=arr["carrier_wavelength"],
        antenna_spacing=arr["antenna_spacing"],
    )
    scenario = ScenarioConfig(
        num_paths=ds.config["scenario"]["num_paths"],
        gain_variances=tuple(ds.config["scenario"]["gain_variances"]),
        distance_range=tuple(ds.config["scenario"]["distance_range"]),
        angle_range=tuple(ds.config["scenario"]["angle_range"]),
    )
    polar = build_polar_codebook(array_cfg, cb["num_rings"], cb["r_min"], cb["r_max"])
    wide = build_wide_codebook(array_cfg, cb["subarray_factor"])
    snr_range = tuple(ds.config["snr_range_db"])
    for i in idx:
        values, n_star, s_star, snr_db = generate_sample(
            ds.seeds[i], scenario, polar, wide, snr_range
        )
        if (n_star != ds.label_n[i] or s_star != ds.label_s[i]
                or not np.allclose(values, ds.yw[i])):
            raise DatasetFormatError(f"sample {i} does not reproduce from its seed")
    return len(idx)


def export_labels_csv(path, ds: Dataset) -> None:
    """Human-inspectable label dump: one row per sample."""
    splits = (["train"] * ds.n_train + ["val"] * ds.n_val + ["test"] * ds.n_test)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["index", "split", "label_n", "label_s", "snr_db", "seed"])
        for i in range(ds.num_samples):
            writer.writerow([
                i, splits[i], int(ds.label_n[i]), int(ds.label_s[i]),
                f"{ds.snr_db[i]:.12g}", int(ds.seeds[i]),
            ])
