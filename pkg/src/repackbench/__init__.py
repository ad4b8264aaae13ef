"""Desk-scale workbench for stimulating and detecting repackaged malware with active learning."""

__version__ = "0.1.0"
