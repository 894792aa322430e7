# Simulation Package
