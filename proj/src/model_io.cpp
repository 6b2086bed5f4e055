#include "sltgp/model_io.hpp"

#include "sltgp/errors.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace sltgp {

namespace {

constexpr const char* kMagic = "sltgp-model";
constexpr int kVersion = 1;

std::string hex(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

void write_vector(std::ostream& out, const char* key, const Eigen::VectorXd& v) {
    out << key;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out << ' ' << hex(v(i));
    }
    out << '\n';
}

double parse_double(const std::string& token, long line) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') {
        throw ParseError("bad number '" + token + "'", line, 0);
    }
    return v;
}

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    std::istringstream expect(const std::string& key) {
        std::string text;
        if (!std::getline(in_, text)) {
            throw ParseError("unexpected end of model record, wanted '" + key + "'", line_, 0);
        }
        ++line_;
        std::istringstream fields(text);
        std::string got;
        fields >> got;
        if (got != key) {
            throw ParseError("expected key '" + key + "' but found '" + got + "'", line_, 0);
        }
        return fields;
    }

    Eigen::VectorXd vector(const std::string& key, Eigen::Index count) {
        std::istringstream fields = expect(key);
        Eigen::VectorXd v(count);
        std::string token;
        for (Eigen::Index i = 0; i < count; ++i) {
            if (!(fields >> token)) {
                throw ParseError("too few values for '" + key + "'", line_, static_cast<long>(i));
            }
            v(i) = parse_double(token, line_);
        }
        if (fields >> token) {
            throw ParseError("too many values for '" + key + "'", line_, static_cast<long>(count));
        }
        return v;
    }

    [[nodiscard]] long line() const { return line_; }

private:
    std::istream& in_;
    long line_ = 0;
};

}  // namespace

void save_model(const SltModel& model, std::ostream& out) {
    const Eigen::Index n = model.size();
    const Eigen::Index d = model.training_inputs.cols();
    out << kMagic << ' ' << kVersion << '\n';
    out << "kernel " << to_string(model.kernel.family) << ' ' << hex(model.kernel.log_length_scale) << ' '
        << hex(model.kernel.log_amplitude) << ' ' << hex(model.kernel.log_signal_variance) << '\n';
    out << "rho " << hex(model.prior.rho) << '\n';
    out << "shape " << n << ' ' << d << '\n';
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = model.training_inputs;
    write_vector(out, "inputs", Eigen::Map<const Eigen::VectorXd>(rows.data(), n * d));
    write_vector(out, "labels", model.labels);
    write_vector(out, "soft_labels", model.soft_labels);
    write_vector(out, "site_nu", model.target_sites.nu_tilde);
    write_vector(out, "site_tau", model.target_sites.tau_tilde);
    out << "converged " << (model.converged ? 1 : 0) << '\n';
    out << "sweeps " << model.sweeps_used << '\n';
    out << "end\n";
}

SltModel load_model(std::istream& in) {
    Reader reader(in);
    int version = 0;
    if (!(reader.expect(kMagic) >> version) || version != kVersion) {
        throw ParseError("unsupported model version", reader.line(), 1);
    }
    KernelSpec kernel;
    {
        std::istringstream fields = reader.expect("kernel");
        std::string family, a, b, c;
        if (!(fields >> family >> a >> b >> c)) {
            throw ParseError("incomplete kernel line", reader.line(), 1);
        }
        kernel.family = kernel_family_from_string(family);
        kernel.log_length_scale = parse_double(a, reader.line());
        kernel.log_amplitude = parse_double(b, reader.line());
        kernel.log_signal_variance = parse_double(c, reader.line());
    }
    const double rho = reader.vector("rho", 1)(0);
    Eigen::Index n = 0;
    Eigen::Index d = 0;
    if (!(reader.expect("shape") >> n >> d) || n <= 0 || d < 0) {
        throw ParseError("bad shape line", reader.line(), 1);
    }
    const Eigen::VectorXd flat = reader.vector("inputs", n * d);
    const Eigen::MatrixXd x =
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(flat.data(), n, d);
    const Eigen::VectorXd y = reader.vector("labels", n);
    const Eigen::VectorXd s = reader.vector("soft_labels", n);
    const Eigen::VectorXd nu = reader.vector("site_nu", n);
    const Eigen::VectorXd tau = reader.vector("site_tau", n);
    int converged = 0;
    int sweeps = 0;
    if (!(reader.expect("converged") >> converged)) {
        throw ParseError("bad converged flag", reader.line(), 1);
    }
    if (!(reader.expect("sweeps") >> sweeps)) {
        throw ParseError("bad sweep count", reader.line(), 1);
    }
    reader.expect("end");
    return slt_from_sites(x, y, s, kernel, rho, nu, tau, converged != 0, sweeps);
}

void save_model_file(const SltModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot open '" + path + "' for writing");
    }
    save_model(model, out);
}

SltModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open '" + path + "'");
    }
    return load_model(in);
}

}  // namespace sltgp
