"""
Point d'entrée de la boîte à outils DGR.

Usage : python dgr.py verify fichier.dgr
        python dgr.py search --i 4 --j 3 --min
"""

import os
import sys

# Ajouter le répertoire racine au path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src.cli import main  # noqa: E402

if __name__ == "__main__":
    main()
