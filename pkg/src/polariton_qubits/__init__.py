"""Spin qubits in quantum dots coupled to trapped exciton-polaritons.

Trap eigenmodes, driven lattice dynamics, a geometric two-qubit phase gate,
single-qubit r.f. rotations and a QND readout error budget.
"""

__version__ = "0.1.0"
