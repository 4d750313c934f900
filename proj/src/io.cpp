#include "pairkrr/io.hpp"

#include "pairkrr/common.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace pairkrr::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

double parse_double(const std::string& token, std::size_t line_no, std::size_t col_no) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0' || errno == ERANGE)
        throw data_error("non-numeric cell '" + token + "' at line " + std::to_string(line_no) +
                         ", column " + std::to_string(col_no));
    return v;
}

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(delim, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string chomp(std::string line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    return line;
}

} // namespace

DenseMatrix load_matrix(const std::string& path, const MatrixFileOptions& opt) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open matrix file: " + path);

    std::vector<double> values;
    std::size_t rows = 0, cols = 0, line_no = 0;
    std::string line;
    bool header_pending = opt.header;
    while (std::getline(in, line)) {
        ++line_no;
        line = chomp(line);
        if (header_pending) {
            header_pending = false;
            continue;
        }
        if (line.empty()) continue;
        const std::vector<std::string> tokens = split(line, opt.delimiter);
        if (rows == 0) {
            cols = tokens.size();
        } else if (tokens.size() != cols) {
            throw data_error(path + ": ragged row at line " + std::to_string(line_no) + " (" +
                             std::to_string(tokens.size()) + " cells, expected " + std::to_string(cols) +
                             ")");
        }
        for (std::size_t c = 0; c < tokens.size(); ++c) values.push_back(parse_double(tokens[c], line_no, c + 1));
        ++rows;
    }
    if (rows == 0) throw data_error(path + ": empty matrix file");
    DenseMatrix m(rows, cols, std::move(values));
    m.require_finite(path.c_str());
    return m;
}

void write_text_file(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw data_error("cannot write file: " + tmp);
        out << content;
        out.flush();
        if (!out) {
            std::remove(tmp.c_str());
            throw data_error("write failed: " + tmp);
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw data_error("cannot move " + tmp + " into place: " + std::strerror(errno));
    }
}

namespace {

void append_matrix(std::ostringstream& os, const DenseMatrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) os << ',';
            os << format_double(m(i, j));
        }
        os << '\n';
    }
}

void append_kernel_config(std::ostringstream& os, const char* key, const kernels::KernelConfig& cfg) {
    os << key << ' ' << kernels::gram_source_name(cfg.kind);
    if (cfg.gamma) os << " gamma " << format_double(*cfg.gamma);
    if (cfg.theta) os << " theta " << format_double(*cfg.theta);
    os << '\n';
}

void append_eig(std::ostringstream& os, const char* name, const EigenDecomposition& e) {
    os << name << "_values " << e.dim() << '\n';
    for (std::size_t i = 0; i < e.dim(); ++i) {
        if (i) os << ',';
        os << format_double(e.values[i]);
    }
    os << '\n';
    os << name << "_vectors " << e.dim() << '\n';
    append_matrix(os, e.vectors);
}

} // namespace

void save_matrix(const DenseMatrix& m, const std::string& path, const MatrixFileOptions& opt) {
    std::ostringstream os;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) os << opt.delimiter;
            os << format_double(m(i, j));
        }
        os << '\n';
    }
    write_text_file(path, os.str());
}

void save_model(const models::TrainedModel& model, const std::string& path) {
    std::ostringstream os;
    os << "pairkrr-model " << kModelFormatVersion << '\n';
    os << "method " << models::method_name(model.method) << '\n';
    os << "dims " << model.m << ' ' << model.q << '\n';
    append_kernel_config(os, "kernel_u", model.kernel_u);
    append_kernel_config(os, "kernel_v", model.kernel_v);
    if (model.lambda) os << "lambda " << format_double(*model.lambda) << '\n';
    if (model.lambda_u) os << "lambda_u " << format_double(*model.lambda_u) << '\n';
    if (model.lambda_v) os << "lambda_v " << format_double(*model.lambda_v) << '\n';
    if (model.weights) {
        os << "weights " << format_double(model.weights->a1) << ' ' << format_double(model.weights->a2)
           << ' ' << format_double(model.weights->a3) << ' ' << format_double(model.weights->a4) << '\n';
    }
    if (model.has_dual()) {
        const DenseMatrix a = model.dual_dense();
        os << "coefficients " << a.rows() << ' ' << a.cols() << '\n';
        append_matrix(os, a);
    }
    if (model.eig_k) append_eig(os, "eig_k", *model.eig_k);
    if (model.eig_g) append_eig(os, "eig_g", *model.eig_g);
    if (model.labels) {
        os << "labels " << model.labels->rows() << ' ' << model.labels->cols() << '\n';
        append_matrix(os, *model.labels);
    }
    os << "end\n";
    write_text_file(path, os.str());
}

namespace {

class ModelReader {
public:
    explicit ModelReader(const std::string& path) : path_(path), in_(path) {
        if (!in_) throw data_error("cannot open model file: " + path);
    }

    bool next_line(std::string& line) {
        while (std::getline(in_, line)) {
            ++line_no_;
            line = chomp(line);
            if (!line.empty()) return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& why) const {
        throw data_error(path_ + ":" + std::to_string(line_no_) + ": " + why);
    }

    DenseMatrix read_matrix(std::size_t rows, std::size_t cols) {
        std::vector<double> values;
        values.reserve(rows * cols);
        std::string line;
        for (std::size_t i = 0; i < rows; ++i) {
            if (!next_line(line)) fail("unexpected end of file inside matrix block");
            const std::vector<std::string> tokens = split(line, ',');
            if (tokens.size() != cols) fail("matrix row has " + std::to_string(tokens.size()) +
                                            " cells, expected " + std::to_string(cols));
            for (std::size_t c = 0; c < cols; ++c) values.push_back(parse_double(tokens[c], line_no_, c + 1));
        }
        return DenseMatrix(rows, cols, std::move(values));
    }

    std::vector<double> read_row(std::size_t count) {
        std::string line;
        if (!next_line(line)) fail("unexpected end of file inside value row");
        const std::vector<std::string> tokens = split(line, ',');
        if (tokens.size() != count) fail("value row has " + std::to_string(tokens.size()) +
                                         " cells, expected " + std::to_string(count));
        std::vector<double> out(count);
        for (std::size_t c = 0; c < count; ++c) out[c] = parse_double(tokens[c], line_no_, c + 1);
        return out;
    }

private:
    std::string path_;
    std::ifstream in_;
    std::size_t line_no_ = 0;
};

kernels::KernelConfig parse_kernel_config(ModelReader& reader, std::istringstream& rest) {
    kernels::KernelConfig cfg;
    std::string kind;
    if (!(rest >> kind)) reader.fail("kernel config missing kind");
    if (kind == "precomputed") cfg.kind = kernels::GramSource::Precomputed;
    else if (kind == "linear") cfg.kind = kernels::GramSource::Linear;
    else if (kind == "rbf") cfg.kind = kernels::GramSource::Rbf;
    else if (kind == "gip") cfg.kind = kernels::GramSource::Gip;
    else if (kind == "smoother") cfg.kind = kernels::GramSource::Smoother;
    else if (kind == "delta") cfg.kind = kernels::GramSource::Delta;
    else reader.fail("unknown kernel kind: " + kind);
    std::string key;
    while (rest >> key) {
        double value = 0.0;
        if (!(rest >> value)) reader.fail("kernel config key '" + key + "' missing value");
        if (key == "gamma") cfg.gamma = value;
        else if (key == "theta") cfg.theta = value;
        else reader.fail("unknown kernel config key: " + key);
    }
    return cfg;
}

} // namespace

models::TrainedModel load_model(const std::string& path) {
    ModelReader reader(path);
    std::string line;
    if (!reader.next_line(line)) reader.fail("empty model file");
    {
        std::istringstream head(line);
        std::string magic;
        int version = -1;
        head >> magic >> version;
        if (magic != "pairkrr-model") reader.fail("not a pairkrr model file");
        if (version != kModelFormatVersion)
            reader.fail("unsupported model format version " + std::to_string(version) + " (this build reads " +
                        std::to_string(kModelFormatVersion) + ")");
    }

    models::TrainedModel model;
    bool saw_method = false, saw_dims = false, saw_end = false;
    while (reader.next_line(line)) {
        std::istringstream is(line);
        std::string key;
        is >> key;
        if (key == "end") {
            saw_end = true;
            break;
        } else if (key == "method") {
            std::string name;
            is >> name;
            model.method = models::method_from_name(name);
            saw_method = true;
        } else if (key == "dims") {
            is >> model.m >> model.q;
            if (!is || model.m == 0 || model.q == 0) reader.fail("invalid dims line");
            saw_dims = true;
        } else if (key == "kernel_u") {
            model.kernel_u = parse_kernel_config(reader, is);
        } else if (key == "kernel_v") {
            model.kernel_v = parse_kernel_config(reader, is);
        } else if (key == "lambda") {
            double v;
            if (!(is >> v)) reader.fail("invalid lambda line");
            model.lambda = v;
        } else if (key == "lambda_u") {
            double v;
            if (!(is >> v)) reader.fail("invalid lambda_u line");
            model.lambda_u = v;
        } else if (key == "lambda_v") {
            double v;
            if (!(is >> v)) reader.fail("invalid lambda_v line");
            model.lambda_v = v;
        } else if (key == "weights") {
            models::FilterWeights w;
            if (!(is >> w.a1 >> w.a2 >> w.a3 >> w.a4)) reader.fail("invalid weights line");
            model.weights = w;
        } else if (key == "coefficients") {
            std::size_t r = 0, c = 0;
            if (!(is >> r >> c)) reader.fail("invalid coefficients header");
            model.coefficients = reader.read_matrix(r, c);
        } else if (key == "eig_k_values" || key == "eig_g_values") {
            std::size_t n = 0;
            if (!(is >> n)) reader.fail("invalid eigenvalue header");
            std::vector<double> values = reader.read_row(n);
            std::string vec_line;
            if (!reader.next_line(vec_line)) reader.fail("missing eigenvector block");
            std::istringstream vh(vec_line);
            std::string vec_key;
            std::size_t vn = 0;
            vh >> vec_key >> vn;
            const std::string expected = (key[4] == 'k') ? "eig_k_vectors" : "eig_g_vectors";
            if (vec_key != expected || vn != n) reader.fail("malformed eigenvector header");
            auto eig = std::make_shared<EigenDecomposition>(
                EigenDecomposition{reader.read_matrix(n, n), std::move(values)});
            if (key[4] == 'k') model.eig_k = std::move(eig);
            else model.eig_g = std::move(eig);
        } else if (key == "labels") {
            std::size_t r = 0, c = 0;
            if (!(is >> r >> c)) reader.fail("invalid labels header");
            model.labels = reader.read_matrix(r, c);
        } else {
            reader.fail("unknown model file key: " + key);
        }
    }
    if (!saw_end) reader.fail("model file missing end marker");
    if (!saw_method || !saw_dims) reader.fail("model file missing method or dims");

    if (model.method == models::Method::Filter) {
        if (!model.weights || !model.labels) reader.fail("filter model requires weights and labels");
    } else if (!model.coefficients) {
        reader.fail("model file missing coefficients");
    }
    return model;
}

} // namespace pairkrr::io
