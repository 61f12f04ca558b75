"""Test suite for qcpattern."""
