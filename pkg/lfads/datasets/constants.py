DATASET_MAGIC = b"LFDS0001"

SPLITS = ("train", "valid")

ENCOD_KEY = "{split}_encod_data"
RECON_KEY = "{split}_recon_data"
TRUTH_KEY = "{split}_truth"

HELD_IN = "held-in"
HELD_OUT = "held-out"
