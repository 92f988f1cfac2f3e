"""
Utilitaires de la boîte à outils DGR : générateur d'instances et valeurs connues.
"""

from .instance_generator import InstanceGenerator
from .known_values import OPTIMAL_GOLOMB_LENGTHS, prime_power_facts

__all__ = ['InstanceGenerator', 'OPTIMAL_GOLOMB_LENGTHS', 'prime_power_facts']
