"""ktforge: exact staged resolutions of on-shell function algebras.

Core layers: gca (graded-commutative arithmetic), jet (total derivatives and
prolongation), dga (Sullivan-type extensions and pushouts), homology (the
windowed exact oracle), factorize (the two staged factorizations and the
replacement functors), tate (Koszul, Noether identities, Koszul-Tate and the
on-shell resolution pipeline), cli (configuration and reporting).
"""

__version__ = "0.1.0"

from ktforge.kernels import BACKEND

__all__ = ["BACKEND", "__version__"]
