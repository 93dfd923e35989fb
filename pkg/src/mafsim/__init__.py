"""Two-user amplify-and-forward relay channel simulator.

Distributed space-time encoding, channel simulation, lattice decoding,
outage and word-error Monte Carlo, and exact diversity-multiplexing
tradeoff curves, with a CLI harness (``mafsim``).
"""

from .analysis import (
    DmtCurve,
    OutageRecord,
    diversity_slope,
    dmt_mac,
    dmt_maf,
    dmt_mar_upper,
    dmt_point_to_point,
    dmt_time_sharing,
    mutual_information,
    outage_probability,
)
from .channel import (
    ChannelRealization,
    EquivalentChannel,
    PowerProfile,
    ReceivedFrame,
    draw_channel,
    equal_power_profile,
    equivalent_channel,
    equivalent_user_channel,
    lattice_system,
    relay_gain,
    transmit_frame,
    ts_naf_system,
    whitener,
)
from .constellation import (
    Constellation,
    GoldenConstants,
    demap_symbols,
    golden_constants,
    make_constellation,
    map_bits,
)
from .decoder import (
    DecodeResult,
    LatticeSystem,
    decode,
    exhaustive_ml,
    lll_reduce,
    mmse_dfe_preprocess,
    sphere_decode,
)
from .errors import ConfigurationError, RankDeficiencyError, SearchSpaceError
from .harness import (
    ExperimentConfig,
    WerRecord,
    derive_trial_seed,
    parse_config,
    run_dmt,
    run_outage,
    run_validate,
    run_wer,
)
from .stbc import (
    EquivalentCodeword,
    GeneratorMap,
    equivalent_codeword,
    generator_map,
    golden_block,
    mother_codeword,
    user_frame,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelRealization",
    "ConfigurationError",
    "Constellation",
    "DecodeResult",
    "DmtCurve",
    "EquivalentChannel",
    "EquivalentCodeword",
    "ExperimentConfig",
    "GeneratorMap",
    "GoldenConstants",
    "LatticeSystem",
    "OutageRecord",
    "PowerProfile",
    "RankDeficiencyError",
    "ReceivedFrame",
    "SearchSpaceError",
    "WerRecord",
    "decode",
    "demap_symbols",
    "derive_trial_seed",
    "diversity_slope",
    "dmt_mac",
    "dmt_maf",
    "dmt_mar_upper",
    "dmt_point_to_point",
    "dmt_time_sharing",
    "draw_channel",
    "equal_power_profile",
    "equivalent_channel",
    "equivalent_codeword",
    "equivalent_user_channel",
    "exhaustive_ml",
    "generator_map",
    "golden_block",
    "golden_constants",
    "lattice_system",
    "lll_reduce",
    "make_constellation",
    "map_bits",
    "mmse_dfe_preprocess",
    "mother_codeword",
    "mutual_information",
    "outage_probability",
    "parse_config",
    "relay_gain",
    "run_dmt",
    "run_outage",
    "run_validate",
    "run_wer",
    "sphere_decode",
    "transmit_frame",
    "ts_naf_system",
    "user_frame",
    "whitener",
]
