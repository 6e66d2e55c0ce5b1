"""Matchings in k-partite k-graphs: extremal graphs, parity obstructions and constructions."""

from .absorbing import (AbsorbConfig, AbsorbingFamily, AbsorbingWitness, build_absorbing_family,
                        classify_dichotomy, count_absorbing, edge_count_within, lambda_set,
                        perfect_matching_via_absorption, verify_absorbing)
from .exact import SearchStats, SearchTimeout, find_perfect_matching, max_matching, verify_matching
from .extremal import (ClosenessConfig, H0Params, build_h0, build_h0_canonical, build_remark_graph, closeness,
                       h0, is_eps_close)
from .harness import GenSpec, check_theorem, engineered_instance, generate, sweep
from .hypergraph import InvalidLegalSet, PartiteHypergraph, Vertex
from .parity import (NullspaceBasis, NullspaceTooLarge, ParityCertificate, check_theorem_case,
                     edge_incidence_nullspace, find_parity_certificate)
from .pipeline import PipelineConfig, PipelineReport, run_pipeline

__version__ = "0.1.0"
