"""Strictness typing for call-by-name and call-by-push-value calculi."""

from strictness.attrs import Attr, AttrVec, Mode, VarId

__all__ = ["Attr", "AttrVec", "Mode", "VarId"]
