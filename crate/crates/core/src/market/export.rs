use std::io::{self, Write};

use super::order::Fill;
use super::snapshot::LobSnapshot;

pub const TRADE_HEADER: &str = "timestamp,taker_id,maker_id,price,size";
pub const SNAPSHOT_HEADER: &str =
    "timestamp,bid_price_0,bid_size_0,bid_price_1,bid_size_1,ask_price_0,ask_size_0,ask_price_1,ask_size_1";

/// Trade log CSV. Ids are order ids.
pub fn write_trades_csv<W: Write>(mut out: W, fills: &[Fill]) -> io::Result<()> {
    writeln!(out, "{TRADE_HEADER}")?;
    for f in fills {
        writeln!(
            out,
            "{},{},{},{},{}",
            f.timestamp, f.taker_order_id, f.maker_order_id, f.price, f.size
        )?;
    }
    Ok(())
}

/// Snapshot stream CSV. Absent levels are written as the 0/0 sentinel.
pub fn write_snapshots_csv<W: Write>(mut out: W, snapshots: &[LobSnapshot]) -> io::Result<()> {
    writeln!(out, "{SNAPSHOT_HEADER}")?;
    for s in snapshots {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            s.timestamp,
            s.bid[0].price,
            s.bid[0].size,
            s.bid[1].price,
            s.bid[1].size,
            s.ask[0].price,
            s.ask[0].size,
            s.ask[1].price,
            s.ask[1].size
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{Level, Side};

    #[test]
    fn csv_layout() {
        let fill = Fill {
            taker_order_id: 9,
            maker_order_id: 3,
            taker_agent: 1,
            maker_agent: 2,
            taker_side: Side::Buy,
            price: 101,
            size: 5,
            timestamp: 42,
        };
        let mut buf = Vec::new();
        write_trades_csv(&mut buf, &[fill]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            format!("{TRADE_HEADER}\n42,9,3,101,5\n")
        );

        let snap = LobSnapshot {
            timestamp: 1,
            sequence: 0,
            bid: [Level::new(100, 3), Level::ABSENT],
            ask: [Level::new(101, 4), Level::new(102, 5)],
        };
        let mut buf = Vec::new();
        write_snapshots_csv(&mut buf, &[snap]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "1,100,3,0,0,101,4,102,5");
        assert_eq!(text.lines().next().unwrap().split(',').count(), 9);
    }
}
