#include "evaluator_bridge.hpp"

#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstdlib>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "bbo/error.hpp"
#include "output.hpp"

namespace bbo::cli {

namespace {

void close_fd(int& fd) {
    if (fd >= 0) {
        ::close(fd);
        fd = -1;
    }
}

} // namespace

EvaluatorProcess::EvaluatorProcess(const std::vector<std::string>& command,
                                   std::chrono::milliseconds timeout)
    : timeout_(timeout) {
    if (command.empty()) {
        fail(ErrorCode::InvalidArgument, "evaluator command is empty");
    }
    // A dead child must surface as a protocol error, not kill us on write.
    std::signal(SIGPIPE, SIG_IGN);

    int in_pipe[2];
    int out_pipe[2];
    if (::pipe2(in_pipe, O_CLOEXEC) != 0) {
        fail(ErrorCode::EvaluatorProtocol, std::string("pipe: ") + std::strerror(errno));
    }
    if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
        ::close(in_pipe[0]);
        ::close(in_pipe[1]);
        fail(ErrorCode::EvaluatorProtocol, std::string("pipe: ") + std::strerror(errno));
    }
    std::vector<char*> argv;
    for (const auto& a : command) {
        argv.push_back(const_cast<char*>(a.c_str()));
    }
    argv.push_back(nullptr);

    pid_ = ::fork();
    if (pid_ < 0) {
        fail(ErrorCode::EvaluatorProtocol, std::string("fork: ") + std::strerror(errno));
    }
    if (pid_ == 0) {
        ::dup2(in_pipe[0], STDIN_FILENO);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::execvp(argv[0], argv.data());
        ::_exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
}

EvaluatorProcess::~EvaluatorProcess() { terminate(); }

void EvaluatorProcess::terminate() {
    close_fd(to_child_);
    close_fd(from_child_);
    if (pid_ > 0) {
        // Closing stdin asks a well-behaved child to exit; give it a moment.
        int status = 0;
        for (int i = 0; i < 50; ++i) {
            if (::waitpid(pid_, &status, WNOHANG) == pid_) {
                pid_ = -1;
                return;
            }
            ::usleep(2000);
        }
        ::kill(pid_, SIGKILL);
        ::waitpid(pid_, &status, 0);
        pid_ = -1;
    }
}

double EvaluatorProcess::evaluate(std::span<const double> x) {
    if (to_child_ < 0) {
        fail(ErrorCode::EvaluatorProtocol, "evaluator is no longer running");
    }
    std::string line;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i > 0) {
            line += ' ';
        }
        line += format_real(x[i]);
    }
    line += '\n';
    std::size_t written = 0;
    while (written < line.size()) {
        const ssize_t n = ::write(to_child_, line.data() + written, line.size() - written);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            terminate();
            fail(ErrorCode::EvaluatorProtocol, std::string("write to evaluator: ") + std::strerror(errno));
        }
        written += static_cast<std::size_t>(n);
    }

    const std::string reply = read_line();
    const char* begin = reply.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    bool ok = end != begin;
    for (const char* p = end; ok && *p != '\0'; ++p) {
        ok = *p == ' ' || *p == '\t' || *p == '\r';
    }
    if (!ok) {
        fail(ErrorCode::EvaluatorProtocol, "evaluator replied '" + reply + "', expected a number");
    }
    if (!std::isfinite(v)) {
        fail(ErrorCode::EvaluatorProtocol, "evaluator replied a non-finite value '" + reply + "'");
    }
    return v;
}

std::string EvaluatorProcess::read_line() {
    using clock = std::chrono::steady_clock;
    const auto deadline = clock::now() + timeout_;
    for (;;) {
        const auto nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return line;
        }
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now());
        if (left.count() <= 0) {
            terminate();
            fail(ErrorCode::EvaluatorTimeout,
                 "evaluator did not answer within " + std::to_string(timeout_.count()) + " ms");
        }
        pollfd pfd{from_child_, POLLIN, 0};
        const int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
        if (rc < 0) {
            if (errno == EINTR) {
                continue;
            }
            terminate();
            fail(ErrorCode::EvaluatorProtocol, std::string("poll: ") + std::strerror(errno));
        }
        if (rc == 0) {
            continue;
        }
        char chunk[4096];
        const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            terminate();
            fail(ErrorCode::EvaluatorProtocol, std::string("read: ") + std::strerror(errno));
        }
        if (n == 0) {
            terminate();
            fail(ErrorCode::EvaluatorProtocol, "evaluator exited without answering");
        }
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

FitnessFunction make_external_fitness(const EvaluatorSpec& spec, std::optional<std::size_t> budget) {
    const auto ms = std::chrono::milliseconds(static_cast<long long>(std::ceil(spec.timeout_seconds * 1000.0)));
    auto process = std::make_shared<EvaluatorProcess>(spec.command, ms);
    return FitnessFunction(make_box_domain(spec.lower, spec.upper),
                           [process](std::span<const double> x) { return process->evaluate(x); },
                           budget);
}

} // namespace bbo::cli
