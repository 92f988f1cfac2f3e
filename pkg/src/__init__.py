# Boîte à outils pour les règles de Golomb disjointes (DGR)
# Package principal contenant tous les composants

__version__ = "1.0.0"
__author__ = "DGR Toolkit Team"
__description__ = "Construction, vérification, recherche et bornes pour les règles de Golomb disjointes"
