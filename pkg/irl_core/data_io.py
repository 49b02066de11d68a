"""
Data input/output for the IRL lab.
Handles instance JSON files, ensemble directories with a manifest, and
experiment result CSVs.
"""

import json
import logging
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from irl_core import CSV_COLUMNS
from irl_core.mdp import IrlInstance, instance_from_arrays
from irl_core.schemas import EnsembleManifest, EnsembleReport, InstanceRecord, ResultRow

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"

PathLike = Union[str, Path]


def instance_to_record(inst: IrlInstance) -> InstanceRecord:
    reward = None if inst.certified_reward is None else inst.certified_reward.tolist()
    return InstanceRecord(
        n=inst.n,
        k=inst.k,
        gamma=inst.gamma,
        transitions=inst.stacked.tolist(),
        reward=reward,
        beta=inst.certified_beta,
    )


def record_to_instance(record: InstanceRecord) -> IrlInstance:
    return instance_from_arrays(
        record.transitions, record.gamma, reward=record.reward, beta=record.beta
    )


def write_instance(inst: IrlInstance, path: PathLike):
    """Instance as JSON: {n, k, gamma, transitions, reward, beta}"""
    path = Path(path)
    path.write_text(json.dumps(instance_to_record(inst).model_dump(), indent=2))


def read_instance(path: PathLike) -> IrlInstance:
    data = json.loads(Path(path).read_text())
    return record_to_instance(InstanceRecord.model_validate(data))


def write_ensemble(ensemble: Sequence, report: EnsembleReport, out_dir: PathLike) -> Path:
    """
    Write one instance file per member plus manifest.json.

    Returns the manifest path.
    """
    if not ensemble:
        raise ValueError("Cannot write an empty ensemble")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    width = max(2, len(str(len(ensemble) - 1)))
    files = []
    for member in ensemble:
        name = f"instance_{member.facet_index:0{width}d}.json"
        write_instance(member.instance, out_dir / name)
        files.append(name)

    manifest = EnsembleManifest(
        config=ensemble[0].config,
        files=files,
        facets=[list(member.facet) for member in ensemble],
        margins=[float(member.margin) for member in ensemble],
        report=report,
    )
    manifest_path = out_dir / MANIFEST_NAME
    manifest_path.write_text(json.dumps(manifest.model_dump(), indent=2))
    logger.info(f"Wrote {len(files)} instances and {MANIFEST_NAME} to {out_dir}")
    return manifest_path


def read_ensemble(in_dir: PathLike) -> Tuple[EnsembleManifest, List]:
    """
    Load an ensemble directory back into HardInstance members.

    Margins are recomputed from the stored instances, not trusted from the
    manifest.
    """
    from irl_core.ensemble import HardInstance
    from irl_core.mdp import separability_margin

    in_dir = Path(in_dir)
    manifest_path = in_dir / MANIFEST_NAME
    if not manifest_path.exists():
        raise FileNotFoundError(f"No {MANIFEST_NAME} in {in_dir}")
    manifest = EnsembleManifest.model_validate(json.loads(manifest_path.read_text()))

    members = []
    for index, (name, facet) in enumerate(zip(manifest.files, manifest.facets)):
        inst = read_instance(in_dir / name)
        if inst.certified_reward is None:
            raise ValueError(f"{name} has no reward")
        reward = np.asarray(inst.certified_reward)
        members.append(HardInstance(
            instance=inst,
            reward=reward,
            facet_index=index,
            facet=tuple(facet),
            config=manifest.config,
            margin=separability_margin(inst, reward),
        ))
    return manifest, members


def rows_to_frame(rows: Sequence[ResultRow]) -> pd.DataFrame:
    return pd.DataFrame([row.model_dump() for row in rows], columns=CSV_COLUMNS)


def emit_csv(rows: Sequence[ResultRow], path: PathLike):
    """Result rows with the fixed header; floats written at full precision"""
    if not rows:
        raise ValueError("No result rows to write")
    rows_to_frame(rows).to_csv(path, index=False, float_format="%.17g")
    logger.info(f"Wrote {len(rows)} result rows to {path}")


def read_csv(path: PathLike) -> List[ResultRow]:
    df = pd.read_csv(path)
    missing = [c for c in CSV_COLUMNS if c not in df.columns]
    if missing:
        raise ValueError(f"{path} lacks columns: {', '.join(missing)}")
    return [ResultRow.model_validate(record) for record in df[CSV_COLUMNS].to_dict(orient="records")]
