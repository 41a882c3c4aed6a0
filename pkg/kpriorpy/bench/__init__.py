from kpriorpy.bench.config import ExperimentConfig, config_from_mapping, read_config_file
from kpriorpy.bench.grid import ResultRecord, run_grid, write_records_csv
from kpriorpy.bench.plot_data import emit_plot_data
