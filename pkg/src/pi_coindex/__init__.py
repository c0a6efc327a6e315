from pi_coindex.models import BoundCertificate, CoindexError, RadonTable
from pi_coindex.simplicial import Face, SimplicialComplex
from pi_coindex.bilinear import BilinearTensor, Construction
from pi_coindex.bounds import BoundQuery, coindex_bounds, radon_table

__all__ = [
    "BilinearTensor",
    "BoundCertificate",
    "BoundQuery",
    "CoindexError",
    "Construction",
    "Face",
    "RadonTable",
    "SimplicialComplex",
    "coindex_bounds",
    "radon_table",
]
