"""CSV emission and run manifests.

All numeric cells are written with 17 significant digits so a rerun with
the same seed is byte-identical and values round-trip exactly through
text.  The manifest lists every emitted file with its sha256 digest and
carries no timestamps, keeping it reproducible too.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path


def fmt(x) -> str:
    """17-significant-digit decimal rendering of one real number."""
    return format(float(x), ".17g")


def write_csv(path: Path, header, rows) -> int:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        count = 0
        for row in rows:
            writer.writerow(row)
            count += 1
    return count


def position_matrix_rows(pm):
    nb, nk = pm.n_bands, pm.grid.n
    for m in range(nb):
        for p in range(nk):
            for n in range(nb):
                for q in range(nk):
                    z = pm.entries[m * nk + p, n * nk + q]
                    yield (m, p, n, q, fmt(z.real), fmt(z.imag))


def connection_rows(conn):
    nk, nb = conn.values.shape[0], conn.values.shape[1]
    for p in range(nk):
        for m in range(nb):
            for n in range(nb):
                z = conn.values[p, m, n]
                yield (p, m, n, fmt(z.real), fmt(z.imag))


def spectrum_rows(result):
    for w, j in zip(result.frequencies, result.currents):
        yield (fmt(w), fmt(j), fmt(result.skipped_fraction))


def pump_rows(result):
    for lam, pol, q in zip(result.lambdas, result.polarization, result.cumulative_charge):
        yield (fmt(lam), fmt(pol), fmt(q))


def report_rows(reports):
    for r in reports:
        yield (r.name, r.band, r.seed, fmt(r.before.real), fmt(r.before.imag),
               fmt(r.after.real), fmt(r.after.imag), fmt(r.delta), int(r.invariant))


def truncation_rows(study):
    for w, v in zip(study.windows, study.values):
        yield (int(w), fmt(v))


def residual_rows(pairs):
    for n_max, resid in pairs:
        yield (int(n_max), fmt(resid))


def sha256_of(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(outdir: Path, task: str, config: dict, seed, grids: dict,
                   tolerances: dict, files: list) -> Path:
    manifest = {
        "task": task,
        "seed": seed,
        "grids": grids,
        "tolerances": tolerances,
        "config": config,
        "outputs": [
            {"file": name, "rows": rows, "sha256": sha256_of(outdir / name)}
            for name, rows in files
        ],
    }
    path = outdir / "manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def ordered_map(fn, items, workers: int = 1) -> list:
    """Map preserving input order; worker count never changes the result."""
    if workers <= 1:
        return [fn(x) for x in items]
    from concurrent.futures import ThreadPoolExecutor
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))

