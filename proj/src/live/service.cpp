#include "admit/live/service.hpp"

#include "admit/trace_io.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <chrono>

namespace admit::live {

namespace {

using Clock = std::chrono::steady_clock;

}  // namespace

LiveServer::LiveServer(ScenarioConfig config, ServerOptions options)
    : options_(std::move(options)), session_(std::move(config)), listener_(options_.port, options_.loopback_only)
{
  const Simulation& sim = session_.simulation();
  hello_ = encode_hello(sim.config(), sim.certificate(), sim.operating_point());
}

LiveServer::~LiveServer() { stop(); }

void LiveServer::start()
{
  if (started_) return;
  started_ = true;
  spdlog::info("live session '{}' listening on port {}", session_.simulation().config().name, port());
  sim_thread_ = std::thread([this] { simulation_loop(); });
  accept_thread_ = std::thread([this] { accept_loop(); });
}

void LiveServer::stop()
{
  if (stopped_) return;
  stopped_ = true;
  stopping_ = true;
  command_ready_.notify_all();
  if (sim_thread_.joinable()) sim_thread_.join();
  if (accept_thread_.joinable()) accept_thread_.join();
  listener_.close();

  std::vector<std::unique_ptr<Client>> clients;
  {
    std::lock_guard lock(clients_mutex_);
    clients.swap(clients_);
  }
  for (auto& c : clients) shutdown_client(*c);

  if (options_.trace_out)
  {
    try
    {
      write_trace_csv(*options_.trace_out, session_.trace());
      spdlog::info("session trace written to {}", options_.trace_out->string());
    }
    catch (const AdmitError& e)
    {
      spdlog::error("trace export failed: {}", e.what());
    }
  }
}

std::size_t LiveServer::client_count() const
{
  std::lock_guard lock(clients_mutex_);
  std::size_t n = 0;
  for (const auto& c : clients_) n += c->finished ? 0 : 1;
  return n;
}

void LiveServer::push(Client& client, const std::string& message)
{
  {
    std::lock_guard lock(client.mutex);
    if (client.closing) return;
    client.outbox.push_back(message);
    while (client.outbox.size() > options_.outbox_limit) client.outbox.pop_front();
  }
  client.ready.notify_one();
}

void LiveServer::broadcast(const std::string& message)
{
  std::lock_guard lock(clients_mutex_);
  for (auto& c : clients_)
    if (!c->finished) push(*c, message);
}

void LiveServer::send_to(std::uint64_t client_id, const std::string& message)
{
  std::lock_guard lock(clients_mutex_);
  for (auto& c : clients_)
    if (c->id == client_id) push(*c, message);
}

void LiveServer::shutdown_client(Client& client)
{
  {
    std::lock_guard lock(client.mutex);
    client.closing = true;
  }
  client.ready.notify_all();
  client.socket->shutdown();
  if (client.reader.joinable()) client.reader.join();
  if (client.writer.joinable()) client.writer.join();
}

void LiveServer::reap_finished_clients()
{
  std::vector<std::unique_ptr<Client>> done;
  {
    std::lock_guard lock(clients_mutex_);
    for (auto it = clients_.begin(); it != clients_.end();)
    {
      if ((*it)->finished)
      {
        done.push_back(std::move(*it));
        it = clients_.erase(it);
      }
      else
      {
        ++it;
      }
    }
  }
  for (auto& c : done)
  {
    shutdown_client(*c);
    spdlog::info("client {} disconnected", c->id);
  }
}

void LiveServer::accept_loop()
{
  while (!stopping_)
  {
    reap_finished_clients();
    Socket socket = listener_.accept(100);
    if (!socket.valid()) continue;
    auto ws = accept_websocket(std::move(socket));
    if (!ws) continue;

    auto client = std::make_unique<Client>();
    client->socket = std::move(ws);
    {
      std::lock_guard lock(hello_mutex_);
      client->outbox.push_back(hello_);
    }
    Client& ref = *client;
    {
      std::lock_guard lock(clients_mutex_);
      client->id = next_client_id_++;
      clients_.push_back(std::move(client));
    }
    ref.reader = std::thread([this, &ref] { reader_loop(ref); });
    ref.writer = std::thread([this, &ref] { writer_loop(ref); });
    spdlog::info("client {} connected", ref.id);
  }
}

void LiveServer::reader_loop(Client& client)
{
  while (auto message = client.socket->receive())
  {
    try
    {
      WireCommand command = decode_command(*message);
      {
        std::lock_guard lock(command_mutex_);
        commands_.push_back(PendingCommand{client.id, std::move(command)});
      }
      command_ready_.notify_one();
    }
    catch (const AdmitError& e)
    {
      push(client, encode_error(e.kind(), e.what()));
    }
  }
  client.finished = true;
  client.ready.notify_all();
}

void LiveServer::writer_loop(Client& client)
{
  while (true)
  {
    std::string message;
    {
      std::unique_lock lock(client.mutex);
      client.ready.wait(lock, [&] { return client.closing || client.finished || !client.outbox.empty(); });
      if (client.closing || client.finished) return;
      message = std::move(client.outbox.front());
      client.outbox.pop_front();
    }
    if (!client.socket->send_text(message))
    {
      client.finished = true;
      return;
    }
  }
}

std::string LiveServer::status_message(bool paused, bool halted) const
{
  nlohmann::ordered_json j;
  const Simulation& sim = session_.simulation();
  j["type"] = "status";
  j["schema_version"] = kWireSchemaVersion;
  j["paused"] = paused;
  j["halted"] = halted;
  j["epoch"] = session_.epoch();
  j["step"] = sim.step_index();
  j["t_s"] = session_.session_time();
  return j.dump();
}

void LiveServer::simulation_loop()
{
  Vec2 force = Vec2::Zero();
  bool paused = false;
  bool halted = false;
  std::uint64_t seq = 0;
  Clock::time_point next_wall = Clock::now();

  while (!stopping_)
  {
    std::deque<PendingCommand> batch;
    {
      std::unique_lock lock(command_mutex_);
      if (paused || halted) command_ready_.wait(lock, [&] { return stopping_ || !commands_.empty(); });
      batch.swap(commands_);
    }
    if (stopping_) break;

    for (PendingCommand& pending : batch)
    {
      const WireCommand& cmd = pending.command;
      switch (cmd.kind)
      {
        case WireCommand::Kind::set_force:
          force = cmd.force;
          break;
        case WireCommand::Kind::release:
          force = Vec2::Zero();
          break;
        case WireCommand::Kind::pause:
          paused = true;
          broadcast(status_message(paused, halted));
          break;
        case WireCommand::Kind::resume:
          paused = false;
          next_wall = Clock::now();
          broadcast(status_message(paused, halted));
          break;
        case WireCommand::Kind::reset:
          session_.reset();
          force = Vec2::Zero();
          halted = false;
          next_wall = Clock::now();
          broadcast(status_message(paused, halted));
          break;
        case WireCommand::Kind::set_config_overrides:
          try
          {
            ScenarioConfig next = apply_overrides(session_.simulation().config(), cmd.overrides);
            session_.reconfigure(std::move(next));
            const Simulation& sim = session_.simulation();
            std::string hello = encode_hello(sim.config(), sim.certificate(), sim.operating_point());
            {
              std::lock_guard lock(hello_mutex_);
              hello_ = hello;
            }
            force = Vec2::Zero();
            halted = false;
            next_wall = Clock::now();
            broadcast(hello);
            broadcast(status_message(paused, halted));
          }
          catch (const AdmitError& e)
          {
            send_to(pending.client, encode_error(e.kind(), e.what()));
          }
          break;
      }
    }
    if (paused || halted) continue;

    const ScenarioConfig& config = session_.simulation().config();
    try
    {
      const StateSnapshot snap = step_realtime(session_, force, config.dt);
      ++steps_taken_;
      const std::size_t decimation = std::max<std::size_t>(1, config.live.snapshot_decimation);
      if (snap.record.step % decimation == 0) broadcast(encode_snapshot(snap, seq++, paused));
    }
    catch (const AdmitError& e)
    {
      const Simulation& sim = session_.simulation();
      spdlog::warn("session halted at step {}: {}", sim.step_index(), e.what());
      broadcast(encode_terminal(e.kind(), sim.step_index(), session_.session_time(), session_.epoch(), e.what()));
      halted = true;
      continue;
    }

    if (config.live.time_scale > 0.0)
    {
      next_wall += std::chrono::duration_cast<Clock::duration>(
          std::chrono::duration<double>(config.dt / config.live.time_scale));
      const auto now = Clock::now();
      if (next_wall < now - std::chrono::milliseconds(250)) next_wall = now;
      std::this_thread::sleep_until(next_wall);
    }
  }
}

}  // namespace admit::live
