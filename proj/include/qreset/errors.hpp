#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace qreset {

// Bad user input: out-of-range rates, inconsistent dimensions, malformed config.
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InvalidDimension : public InvalidParameter {
public:
    using InvalidParameter::InvalidParameter;
};

// Config-file problems surfaced by the CLI (exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A least-squares fit that did not converge or had degenerate input.
class FitFailure : public std::runtime_error {
public:
    explicit FitFailure(const std::string& msg, double residual = std::nan(""))
        : std::runtime_error(msg), residual(residual) {}
    double residual;
};

// Calibration pipeline failure, tagged with the step (1-4) that failed.
class PipelineFailure : public FitFailure {
public:
    PipelineFailure(int step, const std::string& msg, double residual = std::nan(""))
        : FitFailure("calibration step " + std::to_string(step) + ": " + msg, residual),
          step(step) {}
    int step;
};

class IntegrationFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DivergentIntegralError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace qreset
