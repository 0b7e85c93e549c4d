"""I2C memory slave (EEPROM style) with open-drain SDA/SCL.

The slave answers to the 7-bit address ``0b1010 A2 A1 A0``, holds 32 bytes and
keeps a 5-bit address pointer.  A write transfer is ``addr+W, word, data...``;
a read transfer shifts out bytes from the pointer until the master NACKs.
The slave only ever pulls SDA low or releases it.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from pathlib import Path

from covesim.sim import Edge, Simulator

MEM_SIZE = 32
ADDRESS_PREFIX = 0b1010
WP_MODES = ("nack", "ignore")


class SlaveState(enum.Enum):
    IDLE = "idle"
    ADDR = "addr"  # receiving the device address byte
    WORD = "word"  # receiving the word address byte
    DATA = "data"  # receiving write data
    ACK = "ack"  # ninth clock after a received byte
    TX = "tx"  # shifting out read data
    MACK = "mack"  # ninth clock after a transmitted byte
    IGNORE = "ignore"  # not addressed, or master ended the read; wait for START/STOP


@dataclass
class I2cConfig:
    page_size: int = 8
    page_wrap: bool = True
    wp_mode: str = "nack"

    def __post_init__(self):
        if self.wp_mode not in WP_MODES:
            raise ValueError(f"wp_mode must be one of {WP_MODES}, got {self.wp_mode!r}")
        if self.page_size < 1 or MEM_SIZE % self.page_size:
            raise ValueError(f"page size {self.page_size} must divide {MEM_SIZE}")


def _bit(sig):
    v = sig.value
    if v.unknown_mask:
        return None
    return v._val


class I2cSlaveDesign:
    """Ports ``SDA``, ``SCL``, ``A0``-``A2`` and ``Wp`` under ``prefix``."""

    writer = "i2c_slave"

    def __init__(self, sim: Simulator, prefix: str = "i2c", config: I2cConfig | None = None, memory=None):
        self.sim = sim
        self.config = config or I2cConfig()
        self.sda = sim.signal(f"{prefix}.SDA")
        self.scl = sim.signal(f"{prefix}.SCL")
        self.a0 = sim.signal(f"{prefix}.A0")
        self.a1 = sim.signal(f"{prefix}.A1")
        self.a2 = sim.signal(f"{prefix}.A2")
        self.wp = sim.signal(f"{prefix}.Wp")
        self.memory = bytearray(MEM_SIZE if memory is None else bytes(memory))
        if len(self.memory) != MEM_SIZE:
            raise ValueError(f"memory image must be {MEM_SIZE} bytes")
        self.pointer = 0
        self.state = SlaveState.IDLE
        self.stop_hooks: list = []
        self.violations = 0
        self._shift = 0
        self._bits = 0
        self._ack = False
        self._after_ack = SlaveState.IDLE
        self._tx_byte = 0
        self._master_ack = False
        sim.spawn(self._process(), name=f"{prefix}.slave", background=True)

    @property
    def device_address(self) -> int | None:
        pins = [_bit(self.a2), _bit(self.a1), _bit(self.a0)]
        if None in pins:
            return None
        return (ADDRESS_PREFIX << 3) | (pins[0] << 2) | (pins[1] << 1) | pins[2]

    def _pull_low(self):
        self.sda.drive(0, self.writer)

    def _release(self):
        self.sda.release(self.writer)

    def _advance_write_pointer(self):
        if self.config.page_wrap:
            size = self.config.page_size
            base = self.pointer - self.pointer % size
            self.pointer = base + (self.pointer + 1) % size
        else:
            self.pointer = (self.pointer + 1) % MEM_SIZE

    async def _process(self):
        sda, scl = self.sda, self.scl
        sensitivity = Edge(sda, scl)
        prev_sda, prev_scl = _bit(sda), _bit(scl)
        while True:
            await sensitivity
            s, c = _bit(sda), _bit(scl)
            if c == 1 and prev_scl == 1 and s != prev_sda:
                if prev_sda == 1 and s == 0:
                    self._on_start()
                elif prev_sda == 0 and s == 1:
                    self._on_stop()
            elif c == 1 and prev_scl == 0:
                self._on_rise(s)
            elif c == 0 and prev_scl == 1:
                self._on_fall()
            prev_sda, prev_scl = s, c

    def _check_boundary(self, event: str) -> None:
        receiving = self.state in (SlaveState.ADDR, SlaveState.WORD, SlaveState.DATA)
        # one bit is always clocked in while the master sets up START/STOP
        if receiving and 2 <= self._bits <= 7:
            self.violations += 1
            self.sim._diag(logging.WARNING, f"i2c slave: {event} after {self._bits} bits of a byte; back to idle")

    def _on_start(self):
        self._check_boundary("START")
        self._release()
        self.state = SlaveState.ADDR
        self._shift = self._bits = 0

    def _on_stop(self):
        self._check_boundary("STOP")
        self._release()
        self.state = SlaveState.IDLE
        self._bits = 0
        for hook in self.stop_hooks:
            hook(self)

    def _on_rise(self, s):
        state = self.state
        if state in (SlaveState.ADDR, SlaveState.WORD, SlaveState.DATA):
            if s is None:
                self.violations += 1
                self.sim._diag(logging.WARNING, "i2c slave: unknown SDA level sampled; back to idle")
                self.state = SlaveState.IGNORE
                return
            self._shift = ((self._shift << 1) | s) & 0xFF
            self._bits += 1
            if self._bits == 8:
                self._byte_received(self._shift)
        elif state is SlaveState.TX:
            self._bits += 1
        elif state is SlaveState.MACK:
            self._master_ack = s == 0

    def _byte_received(self, byte: int):
        state = self.state
        ack = True
        if state is SlaveState.ADDR:
            if byte >> 1 != self.device_address:
                self.state = SlaveState.IGNORE
                return
            after = SlaveState.TX if byte & 1 else SlaveState.WORD
        elif state is SlaveState.WORD:
            self.pointer = byte % MEM_SIZE
            after = SlaveState.DATA
        else:
            after = SlaveState.DATA
            if _bit(self.wp) != 0:
                ack = self.config.wp_mode == "ignore"
            else:
                self.memory[self.pointer] = byte
                self._advance_write_pointer()
        self._ack = ack
        self._after_ack = after
        self.state = SlaveState.ACK
        self._bits = 0

    def _on_fall(self):
        state = self.state
        if state is SlaveState.ACK:
            if self._bits == 0:
                # start of the ninth clock
                if self._ack:
                    self._pull_low()
                self._bits = 1
                return
            self._release()
            if not self._ack:
                self.state = SlaveState.IGNORE
            elif self._after_ack is SlaveState.TX:
                self._load_tx()
            else:
                self.state = self._after_ack
                self._shift = self._bits = 0
        elif state is SlaveState.TX:
            if self._bits < 8:
                self._put_bit(7 - self._bits)
            else:
                self._release()
                self.state = SlaveState.MACK
                self._master_ack = False
        elif state is SlaveState.MACK:
            if self._master_ack:
                self._load_tx()
            else:
                self.state = SlaveState.IGNORE

    def _load_tx(self):
        self.state = SlaveState.TX
        self._tx_byte = self.memory[self.pointer]
        self.pointer = (self.pointer + 1) % MEM_SIZE
        self._bits = 0
        self._put_bit(7)

    def _put_bit(self, index: int):
        if (self._tx_byte >> index) & 1:
            self._release()
        else:
            self._pull_low()


def i2c_pullup_wrapper(design: I2cSlaveDesign) -> I2cSlaveDesign:
    """Add the bus pull-ups so a released SDA/SCL reads 1."""
    design.sda.set_pull_up(True)
    design.scl.set_pull_up(True)
    return design


def load_memory_hex(path) -> bytearray:
    """Read a 32-line hex image, one byte per line."""
    lines = [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if len(lines) != MEM_SIZE:
        raise ValueError(f"{path}: expected {MEM_SIZE} bytes, found {len(lines)}")
    image = bytearray()
    for i, ln in enumerate(lines):
        try:
            value = int(ln, 16)
        except ValueError:
            raise ValueError(f"{path}: entry {i} is not hex: {ln!r}") from None
        if not 0 <= value <= 0xFF:
            raise ValueError(f"{path}: entry {i} out of byte range: {ln!r}")
        image.append(value)
    return image


def dump_memory_hex(memory, path) -> None:
    Path(path).write_text("".join(f"{b:02x}\n" for b in memory), encoding="utf-8")
