#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace labelset {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A text artifact (manifest, TSV table, NDJSON log) failed to parse.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A pipeline stage needs a file that an earlier stage should have produced.
class MissingArtifact : public Error {
 public:
  MissingArtifact(std::string path, std::string producer)
      : Error("missing artifact " + path + " (produced by '" + producer + "')"),
        path_(std::move(path)),
        producer_(std::move(producer)) {}

  const std::string& path() const noexcept { return path_; }
  const std::string& producer() const noexcept { return producer_; }

 private:
  std::string path_;
  std::string producer_;
};

}  // namespace labelset
