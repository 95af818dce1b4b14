from src.networks.comorbidity import (
    DifferentialNetwork,
    DiseaseGraph,
    build_ddn,
    build_disease_graph,
    coco,
    prevalence,
)
from src.networks.export import ddn_summary, to_dot, write_coo, write_dot, write_graphml, write_json
from src.networks.patient import (
    PatientGraph,
    build_patient_graph,
    patient_disease_bipartite,
    to_adjacency,
)

__all__ = [
    "DifferentialNetwork",
    "DiseaseGraph",
    "PatientGraph",
    "build_ddn",
    "build_disease_graph",
    "build_patient_graph",
    "coco",
    "ddn_summary",
    "patient_disease_bipartite",
    "prevalence",
    "to_adjacency",
    "to_dot",
    "write_coo",
    "write_dot",
    "write_graphml",
    "write_json",
]
