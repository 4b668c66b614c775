"""Quantum-classical scheduling experiments: job-shop QUBOs, LR/iterative QAOA, VarQITE and DNL readout mitigation."""

__version__ = "0.1.0"
