"""Adiabatic covariance root finding.

Prepares ground and excited states of spin Hamiltonians by morphing a trivially
solvable Hamiltonian into the target in discrete steps and, at every step,
driving a variational statevector to a joint root of its covariances with the
instantaneous Hamiltonian.
"""

__version__ = "0.1.0"
