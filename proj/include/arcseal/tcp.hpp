#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "arcseal/node.hpp"

namespace arcseal::node {

// TCP binding of NodeCore: one reader thread per connection, a writer queue
// per connection, a tick thread, and reconnect-with-backoff for the static
// peer list. Chain import and sealing stay serialized behind one mutex.
class TcpNode {
 public:
  TcpNode(NodeConfig config, ledger::AuthoritySet authorities);
  ~TcpNode();

  void start();
  void stop();

  std::uint16_t bound_port() const { return bound_port_; }

  RecordAck submit(const ledger::ChainRecord& record, const Credential& credential);
  std::optional<ledger::ChainRecord> fetch(const ledger::Uid& uid);
  std::uint64_t tip_height();
  std::size_t connected_peer_count();
  std::vector<std::string> metrics();

 private:
  struct Conn;

  double now() const;
  void accept_loop();
  void reader_loop(std::shared_ptr<Conn> conn);
  void writer_loop(std::shared_ptr<Conn> conn);
  void connector_loop(std::string address);
  void tick_loop();
  void enqueue(const std::string& peer_key, const WireMessage& msg);
  void drop_connection(const std::shared_ptr<Conn>& conn);

  NodeConfig config_;
  std::unique_ptr<NodeCore> core_;
  std::mutex core_mu_;

  std::atomic<bool> running_{false};
  int listen_fd_ = -1;
  std::uint16_t bound_port_ = 0;
  std::chrono::steady_clock::time_point epoch_;

  std::mutex conns_mu_;
  std::vector<std::shared_ptr<Conn>> conns_;
  std::vector<std::thread> threads_;
};

// Blocking client submit: connects, sends the record, waits for its ack.
RecordAck tcp_submit(const std::string& address, const ledger::ChainRecord& record,
                     const Credential& credential, double timeout_s = 5.0);

std::uint16_t pick_free_port();

}  // namespace arcseal::node
