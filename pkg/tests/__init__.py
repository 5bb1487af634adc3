"""Test suite for bridgeflow"""
