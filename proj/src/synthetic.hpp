#pragma once
#include <cstdint>
#include <string>
#include "model.hpp"

namespace orpca {

struct synthetic_config {
    int p = 40;              // ambient dimension
    int n = 200;             // stream length
    int r_true = 10;         // intrinsic rank
    double rho = 0.01;       // corruption fraction
    double magnitude = 1000; // uniform corruption half-range
    uint64_t seed = 0;
};

struct synthetic_dataset {
    MatrixXd U;   // p x r_true left factor
    MatrixXd Vc;  // n x r_true right factor
    MatrixXd X;   // clean U * Vc^T
    MatrixXd E;   // sparse corruption, exactly round(rho*p*n) nonzeros
    MatrixXd Z;   // observed X + E
    uint64_t seed = 0;
};

// Low-rank ground truth with gross sparse corruption: factor entries are
// N(0, 1/n), corruption support is drawn without replacement, values uniform
// in [-magnitude, magnitude]. Fully determined by (config, seed) through the
// named generator streams.
synthetic_dataset generate(const synthetic_config& cfg);

// "small" -> (40, 200, 10, 0.01); "mid" -> (400, 1000, 10, 0.01).
synthetic_config preset(const std::string& name);

}  // namespace orpca
