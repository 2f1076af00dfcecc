# Copyright The lateral-line-estimator Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Constants for the lateral line estimation pipeline."""

# Sensor array layout
SENSOR_LABELS = ('P0', 'PL1', 'PL2', 'PL3', 'PL4', 'PR1', 'PR2', 'PR3', 'PR4')
N_SENSORS = 9

# Recording protocol
RECORDINGS_PER_PARAMETER = 5
DEFAULT_PER_RECORDING = 250
DEFAULT_FLUME_SPEED_MPS = 0.175
DEFAULT_SAMPLE_RATE_HZ = 100.0

# Gaussian smoothing window
DEFAULT_SMOOTHING_WINDOW = 25
DEFAULT_SMOOTHING_SIGMA = (DEFAULT_SMOOTHING_WINDOW - 1) / 6

# Train/test protocol
DEFAULT_TRAIN_FRACTION = 0.8

# Random forest
DEFAULT_N_TREES = 500
DEFAULT_MIN_NODE_SIZE = 5

# Back propagation network
DEFAULT_BPNN_LEARNING_RATE = 0.1
MIN_BPNN_LEARNING_RATE = 1e-12
BPNN_INIT_LOW = -0.5
BPNN_INIT_HIGH = 0.5

# Epsilon support vector regression
DEFAULT_SVR_C_BOX = 1.0
DEFAULT_SVR_EPS_TUBE = 0.1
DEFAULT_SVR_TOL = 1e-3
DEFAULT_SVR_MAX_ITER = 200_000
DEFAULT_SVR_CACHE_ROWS = 2048
SVR_TAU = 1e-12

# Multiple linear regression
DEFAULT_F_TEST_ALPHA = 0.05
RANK_TOLERANCE = 1e-10
BETA_CF_MAX_ITER = 500
BETA_CF_TOL = 1e-12
BETA_CF_FPMIN = 1e-300

# Redundancy and sweeps
DEFAULT_PLATEAU_TOL = 0.02
DEFAULT_KNEE_TOL = 0.01
DEFAULT_SWEEP_HOLDOUT = 0.2
DEFAULT_HIDDEN_GRID = tuple(range(1, 16))
DEFAULT_ITERATION_GRID = (50, 100, 150, 200, 250, 300, 400, 500, 700, 1000)

# Report formatting
REPORT_DECIMALS = 4
MODEL_FORMAT_VERSION = 1

# Output file names
GROUND_TRUTH_FILE = 'ground_truth.json'
SAMPLES_FILE = 'samples.csv'
MODEL_FILE = 'model.json'

# Environment variable names
ENV_ALLE_THREADS = 'ALLE_THREADS'
ENV_ALLE_LOG_LEVEL = 'ALLE_LOG_LEVEL'
DEFAULT_LOG_LEVEL = 'WARNING'
