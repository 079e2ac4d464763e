"""
Circulant matrices and their shared eigenbasis
==============================================

Every circulant matrix is diagonalised by the discrete Fourier vectors, and
its eigenvalues are the generator evaluated at the roots of unity. Real
symmetric circulants additionally share one real orthogonal basis made of
sampled cosines and sines.
"""
# %%
import numpy as np

from polystab import circulant as circ

C = circ.circulant([2, -1, 0, 0, 0, -1])
print(C.dense())
print("closed form:", np.round(circ.eigenvalues(C).real, 12))
print("dense solver:", np.round(np.linalg.eigvalsh(C.dense()), 12))

# %%
# Two unrelated symmetric circulants of the same size have the same real
# eigenvectors; ``v_k`` belongs to the eigenvalue with index ``ceil(k/2)``.
rng = np.random.default_rng(0)
basis = circ.real_symmetric_eigenbasis(6)
for _ in range(2):
    A = circ.circulant(circ.symmetric_generator(6, rng))
    print("max |A v - psi v| =", circ.eigenbasis_residual(A, basis))
print("squared norms:", basis.squared_norms)
