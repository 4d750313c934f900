#pragma once

#include "pairkrr/dense_matrix.hpp"
#include "pairkrr/models.hpp"

#include <string>

namespace pairkrr::io {

/// CSV dialect: one delimiter, '.' decimal point, optional single header line.
struct MatrixFileOptions {
    char delimiter = ',';
    bool header = false;
};

/// Parses a rectangular numeric CSV; row i of the file becomes row i of the
/// matrix. Errors name the offending line and column.
DenseMatrix load_matrix(const std::string& path, const MatrixFileOptions& opt = {});

/// Writes with 17 significant digits (round-trip exact for doubles), via a
/// temporary file renamed into place so failures leave no partial output.
void save_matrix(const DenseMatrix& m, const std::string& path, const MatrixFileOptions& opt = {});

/// Current model file format version.
inline constexpr int kModelFormatVersion = 1;

/// Versioned structured-text model persistence. Numbers are printed with 17
/// significant digits; load(save(model)) reproduces predictions to 1e-12.
void save_model(const models::TrainedModel& model, const std::string& path);
models::TrainedModel load_model(const std::string& path);

/// Atomic whole-file text write (temp + rename).
void write_text_file(const std::string& path, const std::string& content);

std::string format_double(double v);

} // namespace pairkrr::io
