from kpriorpy.data_wrangler.file_io import load_dense_csv, load_sparse, save_sparse
from kpriorpy.data_wrangler.synthetic import class_concentrated_split, concat_splits, make_moons, ordered_splits
from kpriorpy.data_wrangler.transform import SplitSpec, split_data, split_indices, standardize
