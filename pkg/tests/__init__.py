"""Test suite for exitsbm"""
