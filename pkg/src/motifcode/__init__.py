"""Coupon collector channels, capacities and non-binary SC-LDPC coding for motif-based DNA storage."""

__version__ = "0.1.0"
