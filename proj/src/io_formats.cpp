#include "io_formats.hpp"
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace orpca {

namespace {

void put_u16(std::ostream& out, uint16_t v) {
    unsigned char b[2] = {(unsigned char)(v & 0xFF),
                          (unsigned char)(v >> 8)};
    out.write(reinterpret_cast<char*>(b), 2);
}

void put_u32(std::ostream& out, uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = (unsigned char)((v >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<char*>(b), 4);
}

void put_f64(std::ostream& out, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i)
        b[i] = (unsigned char)((bits >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<char*>(b), 8);
}

bool get_bytes(std::istream& in, unsigned char* b, size_t n) {
    in.read(reinterpret_cast<char*>(b), std::streamsize(n));
    return size_t(in.gcount()) == n;
}

uint16_t as_u16(const unsigned char* b) {
    return uint16_t(b[0]) | uint16_t(b[1]) << 8;
}

uint32_t as_u32(const unsigned char* b) {
    uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

double as_f64(const unsigned char* b) {
    uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = (bits << 8) | b[i];
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

std::ifstream open_in(const std::string& path, bool binary) {
    std::ifstream f(path, binary ? std::ios::binary : std::ios::in);
    if (!f)
        throw io_error(io_error::open_failed, "cannot open " + path);
    return f;
}

}  // namespace

void write_matrix(std::ostream& out, const MatrixXd& m) {
    out.write("ORPM", 4);
    put_u16(out, 1);
    put_u16(out, 0);
    put_u32(out, uint32_t(m.rows()));
    put_u32(out, uint32_t(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) put_f64(out, m(i, j));
}

void write_matrix(const std::string& path, const MatrixXd& m) {
    std::ostringstream buf(std::ios::binary);
    write_matrix(buf, m);
    atomic_write_file(path, buf.str());
}

MatrixXd read_matrix(std::istream& in) {
    unsigned char hdr[16];
    if (!get_bytes(in, hdr, 16))
        throw io_error(io_error::truncated, "matrix header truncated");
    if (std::memcmp(hdr, "ORPM", 4) != 0)
        throw io_error(io_error::bad_magic, "not a matrix container");
    if (as_u16(hdr + 4) != 1)
        throw io_error(io_error::bad_version, "unsupported container version");
    uint32_t rows = as_u32(hdr + 8), cols = as_u32(hdr + 12);
    MatrixXd m(rows, cols);
    std::vector<unsigned char> buf(size_t(rows) * 8);
    for (uint32_t j = 0; j < cols; ++j) {
        if (!get_bytes(in, buf.data(), buf.size()))
            throw io_error(io_error::truncated, "matrix payload truncated");
        for (uint32_t i = 0; i < rows; ++i)
            m(i, j) = as_f64(buf.data() + size_t(i) * 8);
    }
    return m;
}

MatrixXd read_matrix(const std::string& path) {
    auto f = open_in(path, true);
    return read_matrix(f);
}

void write_csv_matrix(std::ostream& out, const MatrixXd& m) {
    char buf[64];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
            if (j) out << ',';
            out << buf;
        }
        out << '\n';
    }
}

void write_csv_matrix(const std::string& path, const MatrixXd& m) {
    std::ostringstream buf;
    write_csv_matrix(buf, m);
    atomic_write_file(path, buf.str());
}

MatrixXd read_csv_matrix(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            if (in.peek() == EOF) break;  // tolerate one trailing blank line
            throw io_error(io_error::parse_failed, "blank csv line");
        }
        std::vector<double> row;
        size_t pos = 0;
        while (true) {
            size_t comma = line.find(',', pos);
            std::string field = line.substr(
                pos, comma == std::string::npos ? comma : comma - pos);
            size_t used = 0;
            double v;
            try {
                v = std::stod(field, &used);
            } catch (const std::exception&) {
                throw io_error(io_error::parse_failed,
                               "unparsable csv field '" + field + "'");
            }
            while (used < field.size() && std::isspace((unsigned char)field[used]))
                ++used;
            if (used != field.size())
                throw io_error(io_error::parse_failed,
                               "unparsable csv field '" + field + "'");
            row.push_back(v);
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw io_error(io_error::ragged_rows, "csv rows have mixed widths");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) return MatrixXd(0, 0);
    MatrixXd m(rows.size(), rows.front().size());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            m(i, j) = rows[size_t(i)][size_t(j)];
    return m;
}

MatrixXd read_csv_matrix(const std::string& path) {
    auto f = open_in(path, false);
    return read_csv_matrix(f);
}

namespace {

// next whitespace-delimited PGM header token, skipping # comments
std::string pgm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(char(c));
    }
    if (tok.empty())
        throw io_error(io_error::truncated, "pgm header truncated");
    return tok;
}

int pgm_int(std::istream& in) {
    std::string tok = pgm_token(in);
    try {
        size_t used = 0;
        int v = std::stoi(tok, &used);
        if (used != tok.size() || v < 0) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw io_error(io_error::parse_failed,
                       "bad pgm header field '" + tok + "'");
    }
}

}  // namespace

std::vector<double> box_downscale(const std::vector<double>& src, int sw,
                                  int sh, int tw, int th) {
    if (sw < 1 || sh < 1 || tw < 1 || th < 1 ||
        src.size() != size_t(sw) * size_t(sh))
        throw io_error(io_error::bad_dimensions, "box_downscale: bad sizes");
    std::vector<double> out(size_t(tw) * size_t(th), 0.0);
    const double cell_h = double(sh) / double(th);
    const double cell_w = double(sw) / double(tw);
    for (int oy = 0; oy < th; ++oy) {
        double y0 = oy * cell_h, y1 = (oy + 1) * cell_h;
        int sy0 = int(std::floor(y0)), sy1 = std::min(sh, int(std::ceil(y1)));
        for (int ox = 0; ox < tw; ++ox) {
            double x0 = ox * cell_w, x1 = (ox + 1) * cell_w;
            int sx0 = int(std::floor(x0));
            int sx1 = std::min(sw, int(std::ceil(x1)));
            double acc = 0.0;
            for (int sy = sy0; sy < sy1; ++sy) {
                double wy = std::min(y1, double(sy + 1)) -
                            std::max(y0, double(sy));
                if (wy <= 0.0) continue;
                for (int sx = sx0; sx < sx1; ++sx) {
                    double wx = std::min(x1, double(sx + 1)) -
                                std::max(x0, double(sx));
                    if (wx <= 0.0) continue;
                    acc += wy * wx * src[size_t(sy) * sw + sx];
                }
            }
            out[size_t(oy) * tw + ox] = acc / (cell_h * cell_w);
        }
    }
    return out;
}

pgm_frame read_pgm_frame(std::istream& in, const frame_spec& spec) {
    if (spec.width < 1 || spec.height < 1)
        throw io_error(io_error::bad_dimensions, "frame spec must be >= 1x1");
    std::string magic = pgm_token(in);
    if (magic != "P5" && magic != "P2")
        throw io_error(io_error::bad_magic, "not a P5/P2 pgm");
    int sw = pgm_int(in);
    int sh = pgm_int(in);
    int maxval = pgm_int(in);
    if (sw < 1 || sh < 1)
        throw io_error(io_error::bad_dimensions, "bad pgm dimensions");
    if (maxval != 255)
        throw io_error(io_error::parse_failed, "pgm maxval must be 255");
    std::vector<double> pix(size_t(sw) * size_t(sh));
    if (magic == "P5") {
        // single whitespace byte after maxval, then raw pixels
        std::vector<unsigned char> raw(pix.size());
        if (!get_bytes(in, raw.data(), raw.size()))
            throw io_error(io_error::truncated, "pgm payload truncated");
        for (size_t i = 0; i < raw.size(); ++i) pix[i] = raw[i] / 255.0;
    } else {
        for (size_t i = 0; i < pix.size(); ++i) {
            int v = pgm_int(in);
            if (v > 255)
                throw io_error(io_error::parse_failed, "pgm value > maxval");
            pix[i] = v / 255.0;
        }
    }
    pgm_frame fr;
    fr.width = spec.width;
    fr.height = spec.height;
    fr.source_width = sw;
    fr.source_height = sh;
    std::vector<double> scaled =
        (sw == spec.width && sh == spec.height)
            ? std::move(pix)
            : box_downscale(pix, sw, sh, spec.width, spec.height);
    fr.values = Eigen::Map<const VectorXd>(scaled.data(),
                                           Eigen::Index(scaled.size()));
    return fr;
}

pgm_frame read_pgm_frame(const std::string& path, const frame_spec& spec) {
    auto f = open_in(path, true);
    return read_pgm_frame(f, spec);
}

void write_pgm_frame(std::ostream& out, const VectorXd& values, int width,
                     int height) {
    if (values.size() != Eigen::Index(width) * height)
        throw io_error(io_error::bad_dimensions, "pgm value count mismatch");
    out << "P5\n" << width << " " << height << "\n255\n";
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        double v = std::min(1.0, std::max(0.0, values(i)));
        out.put(char((unsigned char)(std::round(v * 255.0))));
    }
}

void write_pgm_frame(const std::string& path, const VectorXd& values,
                     int width, int height) {
    std::ostringstream buf(std::ios::binary);
    write_pgm_frame(buf, values, width, height);
    atomic_write_file(path, buf.str());
}

void atomic_write_file(const std::string& path, const std::string& bytes) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f)
            throw io_error(io_error::open_failed,
                           "cannot write " + tmp.string());
        f.write(bytes.data(), std::streamsize(bytes.size()));
        if (!f)
            throw io_error(io_error::open_failed,
                           "short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec)
        throw io_error(io_error::open_failed,
                       "cannot move " + tmp.string() + " into place");
}

}  // namespace orpca
