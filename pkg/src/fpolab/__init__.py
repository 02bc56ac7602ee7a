"""Framed partial orders: embeddability of circuit diagrams into causal structures."""
from .canonical import CanonicalForm, canonical_form, canonical_fpo, is_relabelling_isomorphic
from .diagram import (Box, Diagram, Wire, coarse_grain, convert_diagram, diagram, diagram_to_fpo,
                      fpo_to_diagram, substitute_box, validate_diagram)
from .enumeration import (Catalog, CatalogEntry, ZigzagSpec, catalog_named, enumerate_fpo_types,
                          enumerate_minimal_representatives, exogenise, is_causal_relevant,
                          is_markov_relevant)
from .errors import *  # noqa: F401,F403
from .poset import (ChainReport, Fpo, FpoClass, chain_report, hasse_reduction, internal_connection_components,
                    parallel_compose, to_dot, transitive_closure, validate_fpo)
from .search import (FopMap, MapClass, classify_map, embeds, find_fop_map, is_equivalent,
                     is_minimal_representative, minimal_representative, projection_to_minrep)
from .spacetime import (CausalSite, Embedding, Localisation, c_local_embed, disjoint_union, minkowski_lattice,
                        site_window_fpo)

__version__ = "0.1.0"
