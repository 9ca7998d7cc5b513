#include "dfr/harness.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "dfr/errors.hpp"
#include "dfr/rng.hpp"

namespace dfr {
namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    cells.push_back(cur);
    return cells;
}

std::string strip(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_double_cell(const std::string& cell, std::size_t line_no, const std::string& path) {
    const std::string v = strip(cell);
    if (v.empty()) throw DataError(path + ":" + std::to_string(line_no) + ": empty cell");
    errno = 0;
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (errno != 0 || end != v.c_str() + v.size()) {
        throw DataError(path + ":" + std::to_string(line_no) + ": non-numeric cell '" + v + "'");
    }
    if (!std::isfinite(d)) {
        throw DataError(path + ":" + std::to_string(line_no) + ": non-finite value '" + v + "'");
    }
    return d;
}

long parse_int_cell(const std::string& cell, std::size_t line_no, const std::string& path) {
    const std::string v = strip(cell);
    errno = 0;
    char* end = nullptr;
    const long l = std::strtol(v.c_str(), &end, 10);
    if (errno != 0 || v.empty() || end != v.c_str() + v.size()) {
        throw DataError(path + ":" + std::to_string(line_no) + ": non-integer label '" + v + "'");
    }
    return l;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

}  // namespace

std::size_t DomainDataset::num_classes() const {
    if (!labels) throw DataError("dataset '" + name + "' has no labels");
    int maxl = -1;
    for (int l : *labels) maxl = std::max(maxl, l);
    if (maxl < 0) throw DataError("dataset '" + name + "' has no labels");
    return static_cast<std::size_t>(maxl) + 1;
}

DomainDataset load_features(const std::string& path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty()) throw DataError(path + ":1: missing header line");

    const std::vector<std::string> header = split(lines[0], ',');
    const bool has_label = !header.empty() && strip(header[0]) == "label";
    const std::size_t dim = header.size() - (has_label ? 1 : 0);
    if (dim == 0) throw DataError(path + ":1: header declares no feature columns");
    for (std::size_t j = 0; j < dim; ++j) {
        const std::string expect = "f" + std::to_string(j);
        if (strip(header[j + (has_label ? 1 : 0)]) != expect) {
            throw DataError(path + ":1: expected header column '" + expect + "'");
        }
    }

    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (std::size_t k = 1; k < lines.size(); ++k) {
        if (strip(lines[k]).empty() && k + 1 == lines.size()) break;  // trailing newline
        const std::size_t line_no = k + 1;
        const std::vector<std::string> cells = split(lines[k], ',');
        if (cells.size() != header.size()) {
            throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " cells, found " +
                            std::to_string(cells.size()));
        }
        if (has_label) {
            const long l = parse_int_cell(cells[0], line_no, path);
            if (l < 0) throw DataError(path + ":" + std::to_string(line_no) + ": negative label");
            labels.push_back(static_cast<int>(l));
        }
        std::vector<double> row(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            row[j] = parse_double_cell(cells[j + (has_label ? 1 : 0)], line_no, path);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError(path + ": no samples");

    DomainDataset ds;
    ds.features = Matrix::from_rows(rows);
    if (has_label) ds.labels = std::move(labels);
    ds.name = path;
    return ds;
}

void save_features(const DomainDataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open file for writing: " + path);
    const bool has_label = dataset.labeled();
    if (has_label && dataset.labels->size() != dataset.size()) {
        throw DataError("dataset '" + dataset.name + "': label count mismatch");
    }
    if (has_label) out << "label";
    for (std::size_t j = 0; j < dataset.dim(); ++j) {
        if (has_label || j > 0) out << ',';
        out << 'f' << j;
    }
    out << '\n';
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (has_label) out << (*dataset.labels)[i];
        const double* row = dataset.features.row(i);
        for (std::size_t j = 0; j < dataset.dim(); ++j) {
            if (has_label || j > 0) out << ',';
            out << fmt17(row[j]);
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

namespace {

struct KeyValue {
    std::string key;
    std::string value;
    std::size_t line_no;
};

std::vector<KeyValue> read_key_values(const std::string& path) {
    const std::vector<std::string> lines = read_lines(path);
    std::vector<KeyValue> out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string line = lines[i];
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = strip(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(i + 1) + ": expected 'key = value'");
        }
        out.push_back({strip(line.substr(0, eq)), strip(line.substr(eq + 1)), i + 1});
    }
    return out;
}

double parse_config_double(const KeyValue& kv, const std::string& path) {
    errno = 0;
    char* end = nullptr;
    const double d = std::strtod(kv.value.c_str(), &end);
    if (errno != 0 || kv.value.empty() || end != kv.value.c_str() + kv.value.size() ||
        !std::isfinite(d)) {
        throw ConfigError(path + ":" + std::to_string(kv.line_no) + ": bad number for '" + kv.key +
                          "'");
    }
    return d;
}

std::uint64_t parse_config_u64(const KeyValue& kv, const std::string& path) {
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(kv.value.c_str(), &end, 10);
    if (errno != 0 || kv.value.empty() || end != kv.value.c_str() + kv.value.size()) {
        throw ConfigError(path + ":" + std::to_string(kv.line_no) + ": bad integer for '" + kv.key +
                          "'");
    }
    return v;
}

bool parse_config_bool(const KeyValue& kv, const std::string& path) {
    if (kv.value == "true" || kv.value == "1") return true;
    if (kv.value == "false" || kv.value == "0") return false;
    throw ConfigError(path + ":" + std::to_string(kv.line_no) + ": bad boolean for '" + kv.key +
                      "' (use true/false)");
}

std::vector<double> parse_config_list(const KeyValue& kv, const std::string& path) {
    std::vector<double> out;
    for (const std::string& cell : split(kv.value, ',')) {
        KeyValue item{kv.key, strip(cell), kv.line_no};
        out.push_back(parse_config_double(item, path));
    }
    return out;
}

}  // namespace

SyntheticSpec load_synthetic_spec(const std::string& path) {
    SyntheticSpec spec;
    for (const KeyValue& kv : read_key_values(path)) {
        if (kv.key == "classes") spec.classes = parse_config_u64(kv, path);
        else if (kv.key == "dim") spec.dim = parse_config_u64(kv, path);
        else if (kv.key == "per_class") spec.per_class = parse_config_u64(kv, path);
        else if (kv.key == "separation") spec.separation = parse_config_double(kv, path);
        else if (kv.key == "covariance") spec.covariance = parse_config_double(kv, path);
        else if (kv.key == "shift_translation") spec.shift_translation = parse_config_double(kv, path);
        else if (kv.key == "shift_rotation_deg") spec.shift_rotation_deg = parse_config_double(kv, path);
        else if (kv.key == "shift_scale") spec.shift_scale = parse_config_double(kv, path);
        else if (kv.key == "label_noise") spec.label_noise = parse_config_double(kv, path);
        else if (kv.key == "seed") spec.seed = parse_config_u64(kv, path);
        else
            throw ConfigError(path + ":" + std::to_string(kv.line_no) + ": unknown key '" + kv.key +
                              "'");
    }
    spec.validate();
    return spec;
}

TrainConfig load_train_config(const std::string& path) {
    TrainConfig cfg;
    for (const KeyValue& kv : read_key_values(path)) {
        if (kv.key == "alpha") cfg.alpha = parse_config_double(kv, path);
        else if (kv.key == "beta") cfg.beta = parse_config_double(kv, path);
        else if (kv.key == "rounds") cfg.rounds = parse_config_u64(kv, path);
        else if (kv.key == "thresholds") cfg.thresholds = parse_config_list(kv, path);
        else if (kv.key == "epochs") cfg.epochs = parse_config_u64(kv, path);
        else if (kv.key == "batch_size") cfg.batch_size = parse_config_u64(kv, path);
        else if (kv.key == "learning_rate") cfg.learning_rate = parse_config_double(kv, path);
        else if (kv.key == "bins") cfg.bins = parse_config_u64(kv, path);
        else if (kv.key == "seed") cfg.seed = parse_config_u64(kv, path);
        else if (kv.key == "reg_steps") cfg.registration.inner_steps = parse_config_u64(kv, path);
        else if (kv.key == "reg_lr") cfg.registration.inner_lr = parse_config_double(kv, path);
        else if (kv.key == "reg_tolerance") cfg.registration.tolerance = parse_config_double(kv, path);
        else if (kv.key == "enable_registration") cfg.enable_registration = parse_config_bool(kv, path);
        else if (kv.key == "enable_histogram") cfg.enable_histogram = parse_config_bool(kv, path);
        else if (kv.key == "enable_pseudo") cfg.enable_pseudo = parse_config_bool(kv, path);
        else if (kv.key == "hist_activations") {
            if (kv.value == "logits") cfg.hist_activations = HistActivations::kLogits;
            else if (kv.value == "embedding") cfg.hist_activations = HistActivations::kEmbedding;
            else
                throw ConfigError(path + ":" + std::to_string(kv.line_no) +
                                  ": hist_activations must be 'logits' or 'embedding'");
        } else {
            throw ConfigError(path + ":" + std::to_string(kv.line_no) + ": unknown key '" + kv.key +
                              "'");
        }
    }
    cfg.validate();
    return cfg;
}

void SyntheticSpec::validate() const {
    if (classes < 2) throw ConfigError("synthetic: need at least 2 classes");
    if (dim < 1) throw ConfigError("synthetic: dim must be >= 1");
    if (per_class < 1) throw ConfigError("synthetic: per_class must be >= 1");
    if (separation < 0 || covariance < 0) throw ConfigError("synthetic: negative magnitude");
    if (!(shift_scale > 0)) throw ConfigError("synthetic: shift_scale must be positive");
    if (!std::isfinite(separation + covariance + shift_translation + shift_rotation_deg +
                       shift_scale + label_noise)) {
        throw ConfigError("synthetic: non-finite magnitude");
    }
    if (label_noise < 0.0 || label_noise >= 1.0) {
        throw ConfigError("synthetic: label_noise must lie in [0,1)");
    }
}

std::pair<DomainDataset, DomainDataset> generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const std::size_t c = spec.classes, d = spec.dim, n = spec.per_class;

    // Class means with RMS pairwise distance equal to `separation`.
    Matrix means(c, d);
    const double mean_scale = spec.separation / std::sqrt(2.0 * static_cast<double>(d));
    for (double& v : means.values()) v = rng.normal(0.0, mean_scale);

    // Affine shift: rotate in a random 2-plane, scale, translate.
    std::vector<double> translation(d, 0.0);
    {
        std::vector<double> dir(d);
        double norm = 0.0;
        for (double& v : dir) {
            v = rng.normal();
            norm += v * v;
        }
        norm = std::sqrt(norm);
        if (norm > 0 && spec.shift_translation != 0.0) {
            for (std::size_t j = 0; j < d; ++j) translation[j] = spec.shift_translation * dir[j] / norm;
        }
    }
    std::vector<double> u1(d, 0.0), u2(d, 0.0);
    const double theta = spec.shift_rotation_deg * 3.14159265358979323846 / 180.0;
    const bool rotate = d >= 2 && theta != 0.0;
    if (rotate) {
        double n1 = 0.0;
        for (double& v : u1) {
            v = rng.normal();
            n1 += v * v;
        }
        n1 = std::sqrt(n1);
        for (double& v : u1) v /= n1;
        double dot = 0.0, n2 = 0.0;
        for (double& v : u2) v = rng.normal();
        for (std::size_t j = 0; j < d; ++j) dot += u1[j] * u2[j];
        for (std::size_t j = 0; j < d; ++j) u2[j] -= dot * u1[j];
        for (double v : u2) n2 += v * v;
        n2 = std::sqrt(n2);
        for (double& v : u2) v /= n2;
    }
    auto apply_shift = [&](double* row) {
        if (rotate) {
            double c1 = 0.0, c2 = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                c1 += u1[j] * row[j];
                c2 += u2[j] * row[j];
            }
            const double cosm1 = std::cos(theta) - 1.0, sin_t = std::sin(theta);
            for (std::size_t j = 0; j < d; ++j) {
                row[j] += cosm1 * (c1 * u1[j] + c2 * u2[j]) + sin_t * (c1 * u2[j] - c2 * u1[j]);
            }
        }
        for (std::size_t j = 0; j < d; ++j) row[j] = spec.shift_scale * row[j] + translation[j];
    };

    DomainDataset source, target;
    source.name = "synthetic-source";
    target.name = "synthetic-target";
    source.features = Matrix(c * n, d);
    target.features = Matrix(c * n, d);
    std::vector<int> src_labels(c * n), tgt_labels(c * n);

    for (std::size_t cls = 0; cls < c; ++cls) {
        for (std::size_t i = 0; i < n; ++i) {
            double* row = source.features.row(cls * n + i);
            for (std::size_t j = 0; j < d; ++j) row[j] = means(cls, j) + rng.normal(0.0, spec.covariance);
            src_labels[cls * n + i] = static_cast<int>(cls);
        }
    }
    for (std::size_t cls = 0; cls < c; ++cls) {
        for (std::size_t i = 0; i < n; ++i) {
            double* row = target.features.row(cls * n + i);
            for (std::size_t j = 0; j < d; ++j) row[j] = means(cls, j) + rng.normal(0.0, spec.covariance);
            apply_shift(row);
            tgt_labels[cls * n + i] = static_cast<int>(cls);
        }
    }
    if (spec.label_noise > 0.0) {
        for (int& l : src_labels) {
            if (rng.uniform01() < spec.label_noise) {
                std::size_t k = rng.index(c - 1);
                if (k >= static_cast<std::size_t>(l)) ++k;
                l = static_cast<int>(k);
            }
        }
    }
    source.labels = std::move(src_labels);
    target.labels = std::move(tgt_labels);
    return {std::move(source), std::move(target)};
}

void write_metrics(const TrainHistory& history, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open metrics file for writing: " + path);
    out << "epoch,L_R,L_S,L_H,L_T,n_pt,target_accuracy,mmd,coral,seconds\n";
    for (const EpochRecord& r : history.epochs) {
        out << r.epoch << ',' << fmt17(r.l_r) << ',' << fmt17(r.l_s) << ',' << fmt17(r.l_h) << ','
            << fmt17(r.l_t) << ',' << r.n_pt << ',' << fmt17(r.target_accuracy) << ','
            << fmt17(r.mmd) << ',' << fmt17(r.coral) << ',' << fmt17(r.seconds) << '\n';
    }
    if (!out) throw IoError("metrics write failed: " + path);
}

void write_ablation(const std::vector<AblationRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open ablation file for writing: " + path);
    out << "variant,target_accuracy\n";
    for (const AblationRow& r : rows) out << r.variant << ',' << fmt17(r.accuracy) << '\n';
    if (!out) throw IoError("ablation write failed: " + path);
}

}  // namespace dfr
