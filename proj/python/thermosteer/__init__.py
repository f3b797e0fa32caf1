"""Thermalisation steering robustness, survival times and work certificates.

Matrices are numpy complex arrays; assemblages, instrument grids and
Hamiltonian families are nested lists indexed [setting][outcome].
"""

from thermosteer._core import (
    K_BOLTZMANN_EV,
    certificate,
    davies_choi,
    delta_bar,
    diamond_norm,
    eigh,
    find_t_star_envelope,
    isotropic_state,
    lhs_member,
    pauli_hamiltonians,
    sr,
    sr_dual,
    sr_from_work,
    t_min_custom,
    t_min_partial,
    thermal_state,
    work_sweep,
)

__all__ = [
    "K_BOLTZMANN_EV",
    "certificate",
    "davies_choi",
    "delta_bar",
    "diamond_norm",
    "eigh",
    "find_t_star_envelope",
    "isotropic_state",
    "lhs_member",
    "pauli_hamiltonians",
    "sr",
    "sr_dual",
    "sr_from_work",
    "t_min_custom",
    "t_min_partial",
    "thermal_state",
    "work_sweep",
]

__version__ = "0.1.0"
