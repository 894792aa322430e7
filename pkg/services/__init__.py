# Services Package

