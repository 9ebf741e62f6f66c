#
# __init__.py
# FocalHessian
#
# Initializes the command-line entry point package for FocalHessian.
#
# Thales Matheus Mendonça Santos - November 2025
#

"""Inicializador do subpacote de comandos de linha."""
