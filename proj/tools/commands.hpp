#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "orpca.h"

// Command implementations shared by the CLI front end and the test
// harnesses. Each returns a process exit code: 0 ok, 2 configuration error,
// 3 I/O error, 4 fatal divergence.
namespace orpca_cli {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_io = 3;
constexpr int exit_diverged = 4;

struct simulate_args {
    std::string preset;  // "small", "mid", or empty for explicit dimensions
    int p = 0;
    int n = 0;
    int r_true = 10;
    double rho = 0.01;
    double magnitude = 1000.0;
    int rank = 0;               // engine rank; 0 = follow r_true
    std::string algo = "implicit";  // implicit | explicit | both
    std::string lambda_mode = "default";  // default | tuned | custom
    double lambda1 = 0.0;       // used when lambda_mode == custom
    double lambda2 = 0.0;
    int seeds = 10;
    uint64_t seed0 = 0;
    std::string out_dir;
    orpca_params params{};      // resolved solver settings (zeros = auto)
};

struct run_args {
    std::string input;
    int rank = 10;
    std::string algo = "implicit";
    double lambda1 = 0.0;  // 0 = 1/sqrt(p) default
    double lambda2 = 0.0;
    std::string out_dir;
    orpca_params params{};
};

struct frames_args {
    std::vector<std::string> inputs;  // sorted lexicographically unless
    std::string list_file;            // an explicit list file is given
    int width = 72;
    int height = 48;
    int rank = 5;
    std::string out_dir;
    orpca_params params{};
};

struct convert_args {
    std::string input;
    std::string output;
};

int cmd_simulate(const simulate_args& args);
int cmd_run(const run_args& args);
int cmd_frames(const frames_args& args);
int cmd_convert(const convert_args& args);

uint64_t fnv1a_file(const std::string& path);

}  // namespace orpca_cli
