#include "service/server.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <list>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "common/error.hpp"

namespace hideseek::service {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

std::string default_bind_address() {
  const char* env = std::getenv(kBindEnv);
  return env && *env ? std::string(env) : std::string(kDefaultBind);
}

namespace {

tcp::endpoint parse_endpoint(const std::string& bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) fail(Errc::Bind, "bind address '" + bind + "' is not host:port");
  std::string host = bind.substr(0, colon);
  if (host.size() >= 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
  int port = 0;
  try {
    std::size_t used = 0;
    port = std::stoi(bind.substr(colon + 1), &used);
    if (used != bind.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    fail(Errc::Bind, "invalid port in '" + bind + "'");
  }
  if (port < 0 || port > 65535) fail(Errc::Bind, "port out of range in '" + bind + "'");
  boost::system::error_code ec;
  const auto addr = asio::ip::make_address(host.empty() ? "0.0.0.0" : host, ec);
  if (ec) fail(Errc::Bind, "invalid host in '" + bind + "': " + ec.message());
  return {addr, static_cast<unsigned short>(port)};
}

// One client. All state is touched only from the connection's own thread.
class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(const sim::Simulator& sim, const ServerOptions& opts, BankWriter* bank, std::string id)
      : session_(sim, std::move(id), opts.mode), bank_(bank), auto_step_ms_(opts.auto_step_ms), timer_(ioc_) {}

  asio::io_context& context() { return ioc_; }
  tcp::socket& socket() { return socket_; }

  void run() {
    ws_.emplace(std::move(socket_));
    ws_->set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_->async_accept([self = shared_from_this()](beast::error_code ec) {
      if (!ec) self->read();
    });
    ioc_.run();
  }

  void stop() {
    asio::post(ioc_, [self = shared_from_this()] {
      beast::error_code ec;
      self->timer_.cancel();
      if (self->ws_ && self->ws_->is_open()) {
        self->ws_->async_close(websocket::close_code::going_away, [self](beast::error_code) { self->ioc_.stop(); });
      } else {
        self->ioc_.stop();
      }
    });
  }

 private:
  void read() {
    ws_->async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->timer_.cancel();
        return;
      }
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->send(handle_message(self->session_, text, self->bank_).dump());
      self->arm_timer();
      self->read();
    });
  }

  void arm_timer() {
    if (auto_step_ms_ <= 0) return;
    timer_.expires_after(std::chrono::milliseconds(auto_step_ms_));
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || self->session_.done()) return;
      self->send(self->session_.act(sim::MotionPrimitive::Stay).dump());
      self->arm_timer();
    });
  }

  void send(std::string text) {
    outbox_.push_back(std::move(text));
    if (outbox_.size() == 1) write_next();
  }

  void write_next() {
    ws_->text(true);
    ws_->async_write(asio::buffer(outbox_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return;
      self->outbox_.pop_front();
      if (!self->outbox_.empty()) self->write_next();
    });
  }

  asio::io_context ioc_{1};
  tcp::socket socket_{ioc_};
  std::optional<websocket::stream<tcp::socket>> ws_;
  beast::flat_buffer buffer_;
  Session session_;
  BankWriter* bank_;
  int auto_step_ms_;
  asio::steady_timer timer_;
  std::deque<std::string> outbox_;
};

}  // namespace

struct Server::Impl {
  Impl(const sim::Simulator& s, ServerOptions o) : sim(s), opts(std::move(o)), acceptor(ioc) {
    if (opts.bank) bank.emplace(*opts.bank);
    const auto ep = parse_endpoint(opts.bind);
    boost::system::error_code ec;
    acceptor.open(ep.protocol(), ec);
    if (!ec) acceptor.set_option(asio::socket_base::reuse_address(true), ec);
    if (!ec) acceptor.bind(ep, ec);
    if (!ec) acceptor.listen(asio::socket_base::max_listen_connections, ec);
    if (ec) fail(Errc::Bind, "cannot bind " + opts.bind + ": " + ec.message());
  }

  void accept() {
    auto conn = std::make_shared<Connection>(sim, opts, bank ? &*bank : nullptr, "s" + std::to_string(++next_id));
    acceptor.async_accept(conn->socket(), [this, conn](boost::system::error_code ec) {
      if (ec) return;
      {
        std::lock_guard lock(mu);
        connections.push_back(conn);
        workers.emplace_back([conn] { conn->run(); });
      }
      accept();
    });
  }

  const sim::Simulator& sim;
  ServerOptions opts;
  std::optional<BankWriter> bank;
  asio::io_context ioc;
  tcp::acceptor acceptor;
  std::thread acceptor_thread;
  std::mutex mu;
  std::condition_variable stopped_cv;
  bool stopped = false;
  std::list<std::shared_ptr<Connection>> connections;
  std::list<std::thread> workers;
  std::uint64_t next_id = 0;
};

Server::Server(const sim::Simulator& sim, ServerOptions opts) : impl_(std::make_unique<Impl>(sim, std::move(opts))) {}

Server::~Server() { stop(); }

unsigned short Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::start() {
  impl_->accept();
  impl_->acceptor_thread = std::thread([this] { impl_->ioc.run(); });
}

void Server::wait() {
  std::unique_lock lock(impl_->mu);
  impl_->stopped_cv.wait(lock, [this] { return impl_->stopped; });
}

void Server::stop() {
  if (!impl_) return;
  {
    std::lock_guard lock(impl_->mu);
    if (impl_->stopped) return;
    impl_->stopped = true;
  }
  asio::post(impl_->ioc, [this] {
    boost::system::error_code ec;
    impl_->acceptor.close(ec);
  });
  impl_->ioc.stop();
  if (impl_->acceptor_thread.joinable()) impl_->acceptor_thread.join();
  std::list<std::thread> workers;
  {
    std::lock_guard lock(impl_->mu);
    for (auto& c : impl_->connections) c->stop();
    workers.swap(impl_->workers);
  }
  for (auto& t : workers) t.join();
  impl_->stopped_cv.notify_all();
}

}  // namespace hideseek::service
