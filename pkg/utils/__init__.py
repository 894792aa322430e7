# Utilities Package

