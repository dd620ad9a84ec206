import os
from typing import List, Optional

import pandas as pd

from audio import AudioClip, MixtureRecord, MANIFEST_COLUMNS, read_wav


def clean_column_names(df: pd.DataFrame) -> pd.DataFrame:
    """Normalize column names by stripping whitespace and removing odd characters."""
    if df.columns is not None:
        cols = (
            df.columns.astype(str)
            .str.replace('\xa0', ' ', regex=False)  # Remove non-breaking space
            .str.replace('\u200b', '', regex=False)  # Remove zero-width space
            .str.replace('\ufeff', '', regex=False)  # Remove BOM
            .str.strip()
        )
        df.columns = cols
    return df


def load_manifest(manifest_path: str) -> pd.DataFrame:
    """
    Read a corpus manifest (tab-separated, one row per record).

    Parameters
    ----------
    manifest_path : str
        Path to ``manifest.tsv``, or to the corpus folder containing it.

    Raises
    ------
    FileNotFoundError
        If the manifest does not exist.
    ValueError
        If a required column is missing or the manifest has no rows.
    """
    if os.path.isdir(manifest_path):
        manifest_path = os.path.join(manifest_path, "manifest.tsv")
    if not os.path.exists(manifest_path):
        raise FileNotFoundError(f"Manifest {manifest_path} does not exist.")

    df = clean_column_names(pd.read_csv(manifest_path, sep="\t", dtype={"id": str, "noise": str}))
    missing = [c for c in MANIFEST_COLUMNS if c not in df.columns]
    if missing:
        raise ValueError(f"Manifest {manifest_path} lacks column(s): {', '.join(missing)}")
    if df.empty:
        raise ValueError(f"Manifest {manifest_path} has no records.")
    df.attrs["root"] = os.path.dirname(os.path.abspath(manifest_path))
    return df


def _parse_noise(info: str):
    """'none' -> (None, None, None); 'gaussian@5dB|wav/x.wav' -> ('gaussian', 5.0, 'wav/x.wav')."""
    if not isinstance(info, str) or info.strip() in ("", "none"):
        return None, None, None
    label, _, path = info.partition("|")
    kind, _, level = label.partition("@")
    snr = float(level[:-2]) if level.endswith("dB") else None
    return kind, snr, (path or None)


def record_from_row(row: pd.Series, root: str) -> MixtureRecord:
    mixture = read_wav(os.path.join(root, row["mixture_path"]))
    sources = [read_wav(os.path.join(root, p)) for p in str(row["source_paths"]).split(";") if p]
    if not sources:
        raise ValueError(f"Record {row['id']} lists no source files.")
    lengths = {len(mixture)} | {len(s) for s in sources}
    if len(lengths) != 1:
        raise ValueError(f"Record {row['id']}: mixture and sources differ in length {sorted(lengths)}.")

    kind, noise_snr, noise_path = _parse_noise(row["noise"])
    noise: Optional[AudioClip] = read_wav(os.path.join(root, noise_path)) if noise_path else None
    return MixtureRecord(
        mixture=mixture,
        sources=sources,
        snr_db=float(row["snr_db"]),
        noise=noise,
        noise_kind=kind or "none",
        noise_snr_db=noise_snr,
        seed=int(row["seed"]),
        record_id=str(row["id"]),
    )


def load_corpus(manifest_path: str, limit: Optional[int] = None, verbose: bool = True) -> List[MixtureRecord]:
    """Load every record of a manifest as PCM-16 dequantized clips."""
    df = load_manifest(manifest_path)
    if limit is not None:
        df = df.head(limit)
    root = df.attrs["root"]
    records = [record_from_row(row, root) for _, row in df.iterrows()]
    if verbose:
        print(f"   -> [Loader] loaded {len(records)} records from {root}")
    return records
