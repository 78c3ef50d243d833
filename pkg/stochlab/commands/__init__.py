# Subcomandos registrados en stochlab.main, en el orden en que aparecen en --help
from stochlab.commands import asymmetry, envelope, mi, parrondo, production, selfcheck, vol

COMMANDS = [mi, asymmetry, vol, production, parrondo, envelope, selfcheck]
