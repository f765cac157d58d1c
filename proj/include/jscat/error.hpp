#pragma once

#include <stdexcept>
#include <string>

namespace jscat {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class WindowTooSmall : public Error {
public:
    explicit WindowTooSmall(const std::string& msg) : Error(msg) {}
};

class TruncationError : public Error {
public:
    explicit TruncationError(const std::string& msg) : Error(msg) {}
};

class PoleError : public Error {
public:
    explicit PoleError(const std::string& msg) : Error(msg) {}
};

class NotResonant : public Error {
public:
    explicit NotResonant(const std::string& msg) : Error(msg) {}
};

class GridError : public Error {
public:
    explicit GridError(const std::string& msg) : Error(msg) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

} // namespace jscat
