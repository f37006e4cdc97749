import os
import sys

# Tests import the flat top-level modules (data_handler, main_simulation, ...).
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
