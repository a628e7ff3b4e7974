#pragma once
#include <iosfwd>
#include <string>
#include <vector>
#include "model.hpp"

namespace orpca {

// I/O failures carry a machine-checkable reason so callers can distinguish
// a truncated payload from a wrong container kind.
struct io_error : std::runtime_error {
    enum kind_t {
        open_failed,
        bad_magic,
        bad_version,
        truncated,
        parse_failed,
        ragged_rows,
        bad_dimensions,
    };
    kind_t kind;
    io_error(kind_t k, const std::string& what)
        : std::runtime_error(what), kind(k) {}
};

// Binary matrix container: magic "ORPM", little-endian u16 version = 1,
// u16 reserved = 0, u32 rows, u32 cols, then rows*cols IEEE-754 binary64
// values in column-major order.
void write_matrix(std::ostream& out, const MatrixXd& m);
void write_matrix(const std::string& path, const MatrixXd& m);
MatrixXd read_matrix(std::istream& in);
MatrixXd read_matrix(const std::string& path);

// CSV matrices, one row per line, 17 significant digits (lossless for
// binary64). An empty file is a 0x0 matrix.
void write_csv_matrix(std::ostream& out, const MatrixXd& m);
void write_csv_matrix(const std::string& path, const MatrixXd& m);
MatrixXd read_csv_matrix(std::istream& in);
MatrixXd read_csv_matrix(const std::string& path);

struct frame_spec {
    int width = 72;   // target size after downscale
    int height = 48;
};

struct pgm_frame {
    int width = 0;         // after downscale
    int height = 0;
    int source_width = 0;  // as stored in the file
    int source_height = 0;
    VectorXd values;       // row-major flattened, in [0,1]
};

// Grayscale PGM (binary P5 or ASCII P2, maxval 255). Pixels are scaled to
// [0,1]; when source dimensions differ from the spec the frame is reduced by
// exact box (area) averaging. Result is row-major flattened.
pgm_frame read_pgm_frame(std::istream& in, const frame_spec& spec);
pgm_frame read_pgm_frame(const std::string& path, const frame_spec& spec);

// Clamp to [0,1], quantize round(v*255) half away from zero, emit binary P5.
void write_pgm_frame(std::ostream& out, const VectorXd& values, int width,
                     int height);
void write_pgm_frame(const std::string& path, const VectorXd& values,
                     int width, int height);

// Area-average reduction of a row-major image, exposed for direct testing.
std::vector<double> box_downscale(const std::vector<double>& src, int sw,
                                  int sh, int tw, int th);

// Write-to-temp-then-rename so partially written outputs are never visible.
void atomic_write_file(const std::string& path, const std::string& bytes);

}  // namespace orpca
