"""Verification oracles and bound checkers."""
from .mechanisms import MECHANISMS, MechanismUnderTest, make_mechanism
from .oracles import (BasicAudit, DeviationReport, Witness, audit_basic, collusion_oracle, ic_oracle,
                      sybil_oracle)

__all__ = ["MECHANISMS", "MechanismUnderTest", "make_mechanism", "BasicAudit", "DeviationReport",
           "Witness", "audit_basic", "collusion_oracle", "ic_oracle", "sybil_oracle"]
