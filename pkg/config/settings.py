# ======================================
# ⚙️ CONFIG — settings.py
# ======================================

import os
from dotenv import load_dotenv

# Carica eventuali variabili da file .env
load_dotenv()

CONFIG_DIR = os.path.dirname(os.path.abspath(__file__))

# Se trovi un valore nel file .env, usa quello; altrimenti usa quello di fallback
LOG_LEVEL = os.getenv("KMSA_LOG_LEVEL", "INFO").upper()
WORKERS = max(int(os.getenv("KMSA_WORKERS", "1")), 1)
DEFAULTS_PATH = os.getenv("KMSA_DEFAULTS_PATH", os.path.join(CONFIG_DIR, "defaults.json"))
