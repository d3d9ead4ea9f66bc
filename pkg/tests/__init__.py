"""
Test suite for ovs-birefringence
"""
