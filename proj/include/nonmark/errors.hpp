// errors.hpp - exception hierarchy shared by every module

#pragma once

#include <stdexcept>
#include <string>

namespace nonmark {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct NotSquare : Error {
    using Error::Error;
};

struct NotHermitian : Error {
    explicit NotHermitian(double dev)
        : Error("matrix is not Hermitian (max deviation " + std::to_string(dev) + ")"),
          deviation(dev) {}
    double deviation;
};

struct InvalidParams : Error {
    using Error::Error;
};

// A requested time lies inside the guard interval of a known singular time.
struct SingularTime : Error {
    SingularTime(double t, double ts, double g)
        : Error("time " + std::to_string(t) + " lies within guard " + std::to_string(g) +
                " of singular time " + std::to_string(ts)),
          time(t), singular_time(ts), guard(g) {}
    double time;
    double singular_time;
    double guard;
};

struct StepSizeUnderflow : Error {
    StepSizeUnderflow(double at, const std::string& why)
        : Error("step size underflow near s=" + std::to_string(at) + ": " + why), position(at) {}
    double position;
};

struct ToleranceNotMet : Error {
    using Error::Error;
};

struct PoleAt : Error {
    explicit PoleAt(double t) : Error("rate has a pole at t=" + std::to_string(t)), time(t) {}
    double time;
};

// Analytic oracle evaluated with its start time on a singular point.
struct SingularPoint : Error {
    explicit SingularPoint(double t) : Error("singular point at t1=" + std::to_string(t)), time(t) {}
    double time;
};

struct RegionTooCoarse : Error {
    using Error::Error;
};

struct NotApplicable : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

} // namespace nonmark
