from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd
from sklearn.preprocessing import StandardScaler

from src.errors import ZeroVarianceFeatureWarning
from src.features.scores import PatientNetworkPN, feature_triple
from src.networks.patient import disease_columns, patient_disease_bipartite

if TYPE_CHECKING:
    from collections.abc import Sequence
    from collections.abc import Set as AbstractSet

    from src.cohort.models import Cohort, DiseaseCode
    from src.networks.comorbidity import DifferentialNetwork

logger = logging.getLogger(__name__)

NETWORK_FEATURES = ("F_n", "F_e", "F_r")


@dataclass(frozen=True)
class FeatureMatrix:
    """Multi-hot diseases followed by the three standardized network features."""

    values: np.ndarray
    columns: tuple[str, ...]
    raw_network: np.ndarray
    mean: np.ndarray
    scale: np.ndarray
    patient_ids: tuple[str, ...]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape  # type: ignore[return-value]

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.values, columns=list(self.columns))
        frame.insert(0, "patient_id", list(self.patient_ids))
        return frame

    def to_csv(self, path: Path) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.10g")
        return path


def network_features(
    cohort: Cohort, ddn: DifferentialNetwork, exclude: AbstractSet[DiseaseCode] = frozenset()
) -> np.ndarray:
    """Raw ``[F_n, F_e, F_r]`` per patient, scoring diseases outside ``exclude``."""
    return np.array(
        [
            feature_triple(PatientNetworkPN.from_codes(p.diseases - exclude), ddn).as_tuple()
            for p in cohort.patients
        ],
        dtype=np.float64,
    )


def feature_matrix(
    cohort: Cohort,
    ddn: DifferentialNetwork,
    train_idx: Sequence[int],
    exclude: AbstractSet[DiseaseCode] = frozenset(),
) -> FeatureMatrix:
    """Patient feature matrix X with network features standardized on training rows only.

    Codes in ``exclude`` get no multi-hot column and do not count toward the
    network features. A network feature that is constant over the training rows
    is set to 0 for every patient and reported with :class:`ZeroVarianceFeatureWarning`.
    """
    if len(train_idx) == 0:
        raise ValueError("feature standardization needs at least one training row")
    multi_hot = patient_disease_bipartite(cohort, exclude).toarray().astype(np.float64)
    raw = network_features(cohort, ddn, exclude)

    scaler = StandardScaler().fit(raw[np.asarray(train_idx)])
    standardized = scaler.transform(raw)
    constant = scaler.var_ == 0
    if constant.any():
        names = [NETWORK_FEATURES[i] for i in np.flatnonzero(constant)]
        message = f"Network feature(s) {names} have zero variance on training rows; set to 0"
        logger.warning(message)
        warnings.warn(message, ZeroVarianceFeatureWarning, stacklevel=2)
        standardized[:, constant] = 0.0

    values = np.hstack([multi_hot, standardized])
    return FeatureMatrix(
        values=values,
        columns=(*disease_columns(cohort, exclude), *NETWORK_FEATURES),
        raw_network=raw,
        mean=scaler.mean_.copy(),
        scale=scaler.scale_.copy(),
        patient_ids=tuple(p.id for p in cohort.patients),
    )
