"""Core infrastructure components"""
