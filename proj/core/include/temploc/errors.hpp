#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace temploc {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad or missing configuration detected before any work is attempted.
class ConfigError : public Error {
public:
    using Error::Error;
};

// --- annotation / frame loading ---

class MalformedLine : public Error {
public:
    MalformedLine(int line_no, const std::string& detail)
        : Error("malformed annotation line " + std::to_string(line_no) + ": " + detail),
          line_no_(line_no) {}
    int line_no() const { return line_no_; }

private:
    int line_no_;
};

class InvalidInterval : public Error {
public:
    InvalidInterval(int line_no, const std::string& detail)
        : Error("invalid interval on annotation line " + std::to_string(line_no) + ": " + detail),
          line_no_(line_no) {}
    int line_no() const { return line_no_; }

private:
    int line_no_;
};

class EmptyVideo : public Error {
public:
    explicit EmptyVideo(const std::string& video_id)
        : Error("no frames found for video '" + video_id + "'"), video_id_(video_id) {}
    const std::string& video_id() const { return video_id_; }

private:
    std::string video_id_;
};

class MissingFrames : public Error {
public:
    MissingFrames(const std::string& video_id, std::vector<int> gaps, const std::string& detail)
        : Error("non-contiguous frames for video '" + video_id + "': " + detail),
          video_id_(video_id),
          gaps_(std::move(gaps)) {}
    const std::string& video_id() const { return video_id_; }
    const std::vector<int>& gaps() const { return gaps_; }

private:
    std::string video_id_;
    std::vector<int> gaps_;
};

class InsufficientVideos : public Error {
public:
    InsufficientVideos(std::size_t requested, std::size_t available)
        : Error("subset requests " + std::to_string(requested) + " videos but only " +
                std::to_string(available) + " are available"),
          requested_(requested),
          available_(available) {}
    std::size_t requested() const { return requested_; }
    std::size_t available() const { return available_; }

private:
    std::size_t requested_;
    std::size_t available_;
};

class ExtractionFailed : public Error {
public:
    ExtractionFailed(int exit_code, const std::string& stderr_excerpt)
        : Error("frame extraction command exited with code " + std::to_string(exit_code) + ": " +
                stderr_excerpt),
          exit_code_(exit_code),
          stderr_excerpt_(stderr_excerpt) {}
    int exit_code() const { return exit_code_; }
    const std::string& stderr_excerpt() const { return stderr_excerpt_; }

private:
    int exit_code_;
    std::string stderr_excerpt_;
};

// --- prompting ---

class MissingQuery : public Error {
public:
    MissingQuery() : Error("prompt strategy requires a non-empty activity query") {}
};

class NonContiguousDescriptions : public Error {
public:
    explicit NonContiguousDescriptions(const std::string& detail)
        : Error("frame descriptions must be contiguous from frame 1: " + detail) {}
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& detail)
        : Error("frame grid requires identical image dimensions: " + detail) {}
};

// --- chat backends ---

class ChatError : public Error {
public:
    using Error::Error;
};

// Retryable failure: connection refused, 5xx, rate limiting.
class TransientError : public ChatError {
public:
    using ChatError::ChatError;
};

class CapabilityMismatch : public ChatError {
public:
    explicit CapabilityMismatch(const std::string& detail)
        : ChatError("backend capability mismatch: " + detail) {}
};

// The endpoint rejected the prompt for being too long. Surfaced as its own
// type so callers can report it instead of silently truncating.
class ContextOverflow : public ChatError {
public:
    ContextOverflow(std::size_t prompt_chars, const std::string& detail)
        : ChatError("prompt rejected for context length (" + std::to_string(prompt_chars) +
                    " chars): " + detail),
          prompt_chars_(prompt_chars) {}
    std::size_t prompt_chars() const { return prompt_chars_; }

private:
    std::size_t prompt_chars_;
};

class BackendUnavailable : public ChatError {
public:
    BackendUnavailable(int attempts, const std::string& last_error)
        : ChatError("backend unavailable after " + std::to_string(attempts) +
                    " attempts; last error: " + last_error),
          attempts_(attempts) {}
    int attempts() const { return attempts_; }

private:
    int attempts_;
};

// Replay backend has no recording for the request digest (fixture drift).
class UnknownDigest : public ChatError {
public:
    explicit UnknownDigest(const std::string& digest)
        : ChatError("no replay entry recorded for digest " + digest), digest_(digest) {}
    const std::string& digest() const { return digest_; }

private:
    std::string digest_;
};

class CacheCorrupt : public ChatError {
public:
    CacheCorrupt(const std::string& digest, const std::string& detail)
        : ChatError("cache entry " + digest + " is corrupt: " + detail), digest_(digest) {}
    const std::string& digest() const { return digest_; }

private:
    std::string digest_;
};

// --- evaluation ---

class EmptySampleSet : public Error {
public:
    EmptySampleSet() : Error("cannot evaluate an empty sample set") {}
};

}  // namespace temploc
