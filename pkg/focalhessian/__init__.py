#
# __init__.py
# FocalHessian
#
# Package initializer for the FocalHessian Hessian-learning toolkit.
#
# Thales Matheus Mendonça Santos - November 2025
#

"""Inicializador do pacote FocalHessian."""
