"""Prêt à Voter model: board operations and the agent network."""

from .board import AuditTables, Board, TallyError
from .pretavoter import ConfigError, ModelConfig, build_network

__all__ = ["AuditTables", "Board", "ConfigError", "ModelConfig", "TallyError", "build_network"]
