"""Tâches d'écriture des résultats : CSV, JSON, snapshots Parquet, manifeste"""

import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict

import pandas as pd
import pyarrow as pa
import pyarrow.parquet as pq
from prefect import task

from pcsft import __version__


@task(name="write_csv", retries=2)
def write_csv(df: pd.DataFrame, out_dir: Path, file_name: str) -> str:
    """
    Écrit un DataFrame en CSV (en-tête toujours présent).

    Args:
        df: DataFrame à écrire
        out_dir: Répertoire du run
        file_name: Nom du fichier (ex: "asymptotics.csv")

    Returns:
        Chemin du fichier écrit
    """
    path = Path(out_dir) / file_name
    df.to_csv(path, index=False, float_format="%.17g")
    print(f"✅ Écrit {file_name}: {len(df)} lignes, {len(df.columns)} colonnes")
    return str(path)


@task(name="write_json")
def write_json(payload: Dict[str, Any], out_dir: Path, file_name: str) -> str:
    path = Path(out_dir) / file_name
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, ensure_ascii=False, default=str)
    print(f"✅ Écrit {file_name}")
    return str(path)


@task(name="write_snapshots_parquet", retries=2)
def write_snapshots_parquet(df: pd.DataFrame, out_dir: Path, dims: list, stride: int, file_name: str = "snapshots.parquet") -> str:
    """
    Snapshots du champ en Parquet (colonnes step, t, index, re, im).

    Les métadonnées du schéma portent dims, dtype et stride.
    """
    if df is None or df.empty:
        print(f"⚠️ Aucun snapshot, aucun fichier écrit pour {file_name}")
        return ""

    table = pa.Table.from_pandas(df, preserve_index=False)
    metadata = dict(table.schema.metadata or {})
    metadata.update({
        b"dims": json.dumps(dims).encode(),
        b"dtype": b"float64",
        b"stride": str(stride).encode(),
    })
    table = table.replace_schema_metadata(metadata)

    path = Path(out_dir) / file_name
    pq.write_table(table, path)
    size_mb = path.stat().st_size / (1024 * 1024)
    print(f"✅ Écrit {file_name} ({size_mb:.2f} MB)")
    return str(path)


def read_snapshot_metadata(path: str) -> Dict[str, Any]:
    metadata = pq.read_schema(path).metadata
    return {
        "dims": json.loads(metadata[b"dims"]),
        "dtype": metadata[b"dtype"].decode(),
        "stride": int(metadata[b"stride"]),
    }


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


@task(name="write_manifest")
def write_manifest(out_dir: Path, command: str, config_sha256: str, seed: int, started: datetime) -> str:
    """Manifeste du run : commande, hash de config, graine, version, durée."""
    finished = utc_now()
    manifest = {
        "command": command,
        "config_sha256": config_sha256,
        "seed": seed,
        "library_version": __version__,
        "started_at": started.isoformat(),
        "finished_at": finished.isoformat(),
        "duration_seconds": round((finished - started).total_seconds(), 3),
    }
    return write_json.fn(manifest, out_dir, "manifest.json")
