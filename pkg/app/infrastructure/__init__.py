"""Infrastructure layer - wire codec, transports, session runner, result files."""

from app.infrastructure.results import CSV_COLUMNS, plot_results, read_results, write_results
from app.infrastructure.session_runner import (
    SessionResult,
    connect_and_send,
    listen_and_receive,
    run_inproc_session,
    run_receiver,
    run_sender,
    run_tcp_session,
)
from app.infrastructure.transport import IMessageChannel, QueueChannel, TcpChannel, channel_pair
from app.infrastructure.wire import FrameDecoder, decode_message, encode_message
